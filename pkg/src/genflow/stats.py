"""Run options and counters shared by the solver stages."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass
class RunOptions:
    mode: str = "fast"          # "reference" or "fast" plentiful-node search
    anchors: bool = True        # keep labels on the 1/(4n^2) grid where possible
    checked: bool = False       # assert invariants after every step
    trace: bool = False         # keep the augmentation event trace


@dataclass
class Stats:
    path_augmentations: int = 0
    null_augmentations: int = 0
    helpful: int = 0
    unhelpful: int = 0
    label_updates: int = 0
    label_passes: int = 0
    contractions: int = 0
    ppn_calls: int = 0
    reduce_calls: int = 0
    heap_ops: int = 0
    arc_scans: int = 0
    ops_since_event: int = 0
    max_ops_between_events: int = 0
    max_label_den: int = 1
    max_label_num: int = 1
    max_label: Fraction = Fraction(1)
    label_den_ok: bool = True
    label_value_ok: bool = True
    anchor_fallbacks: int = 0
    ops_budget_ok: bool = True
    psi_trace: list[Fraction] = field(default_factory=list)
    xi_trace: list[Fraction] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    trace: list[tuple] = field(default_factory=list)

    @property
    def label_bound_ok(self) -> bool:
        return self.label_den_ok and self.label_value_ok

    @property
    def augmentations(self) -> int:
        return self.path_augmentations + self.null_augmentations

    def close_interval(self) -> None:
        if self.ops_since_event > self.max_ops_between_events:
            self.max_ops_between_events = self.ops_since_event
        self.ops_since_event = 0

    def observe_labels(self, mu: dict, n: int | None = None, B: int | None = None) -> None:
        for x in mu.values():
            if x.denominator > self.max_label_den:
                self.max_label_den = x.denominator
            if x.numerator > self.max_label_num:
                self.max_label_num = x.numerator
            if x > self.max_label:
                self.max_label = x
            if n is not None and B is not None:
                if x.denominator > 4 * n * n * B ** (2 * n) or x.numerator > 4 * n * n * B ** (2 * n):
                    self.label_den_ok = False
                if x > 2 * n * B ** n:
                    self.label_value_ok = False

    def merge(self, other: "Stats") -> None:
        for name in ("path_augmentations", "null_augmentations", "helpful", "unhelpful",
                     "label_updates", "label_passes", "contractions", "ppn_calls",
                     "reduce_calls", "heap_ops", "arc_scans", "anchor_fallbacks"):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        self.max_ops_between_events = max(self.max_ops_between_events, other.max_ops_between_events)
        self.max_label_den = max(self.max_label_den, other.max_label_den)
        self.max_label_num = max(self.max_label_num, other.max_label_num)
        self.max_label = max(self.max_label, other.max_label)
        self.label_den_ok = self.label_den_ok and other.label_den_ok
        self.label_value_ok = self.label_value_ok and other.label_value_ok
        self.ops_budget_ok = self.ops_budget_ok and other.ops_budget_ok
        self.psi_trace += other.psi_trace
        self.xi_trace += other.xi_trace
        self.violations += other.violations
        self.trace += other.trace
