"""Exception hierarchy for MDP, chain and optimization errors."""

from typing import List, Optional, Sequence, Tuple


class MdpError(ValueError):
    """Base class for every error raised by the average_reward package."""


class DimensionMismatchError(MdpError):
    """Array shapes of an MDP, policy or distribution do not agree."""


class InvalidMdpError(MdpError):
    """An MDP failed validation."""

    def __init__(self, violations: Sequence[str]):
        self.violations: List[str] = list(violations)
        preview = "; ".join(self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"Invalid MDP: {preview}{more}")


class InvalidPolicyError(MdpError):
    """A policy table is not row-stochastic or violates its floor."""


class StepTooLargeError(MdpError):
    """A tangent step pushes a policy entry out of (0, 1)."""

    def __init__(self, state: int, action: int, value: float):
        self.state = state
        self.action = action
        self.value = value
        super().__init__(
            f"Perturbed entry ({state}, {action}) = {value!r} leaves (0, 1)"
        )


class SupportError(MdpError):
    """A distribution lacks full support or a policy has a zero entry."""


class SingularBlockError(MdpError):
    """A linear solve met a pivot below tolerance."""

    def __init__(self, block: str, pivot: float):
        self.block = block
        self.pivot = pivot
        super().__init__(f"Singular system in block '{block}' (|pivot| = {pivot:.3e})")


class ProjectionError(MdpError):
    """Projection onto the floored simplex is infeasible or failed to terminate."""


class InfeasibleConfigError(MdpError):
    """Step sizes, floors or accuracy targets are outside their admissible range."""


class ClassificationInconsistencyError(MdpError):
    """Two sampled recurrent classes intersect without being equal."""

    def __init__(self, first: Sequence[int], second: Sequence[int], probe: Optional[int] = None):
        self.first: Tuple[int, ...] = tuple(sorted(first))
        self.second: Tuple[int, ...] = tuple(sorted(second))
        self.probe = probe
        super().__init__(
            f"Sampled classes {self.first} and {self.second} overlap but differ"
            + (f" (probe {probe})" if probe is not None else "")
        )
