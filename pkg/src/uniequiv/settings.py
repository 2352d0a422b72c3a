from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by the whole pipeline.

    norm_tol is relative (scaled by max(1, ||A||^2)); gap_tol is absolute.
    match_threshold must stay below 1/2, the uniqueness bound for projection
    matchings.
    """

    norm_tol: float = 1e-9
    proj_tol: float = 1e-8
    gap_tol: float = 1e-6
    match_threshold: float = 0.3
    max_subdiv: int = 12
    residual_max: float = 0.25
    overlap_min: float = 0.1
    max_retries: int = 3

    def __post_init__(self):
        for name in ("norm_tol", "proj_tol", "gap_tol", "match_threshold", "residual_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.match_threshold >= 0.5:
            raise ValueError("match_threshold must be < 1/2")
        if self.residual_max >= 0.5:
            raise ValueError("residual_max must be < 1/2")

    def with_(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULT = Tolerances()
