from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by kernels, models and the verify suite."""

    hermitian: float = 1e-10
    orthonormal: float = 1e-10
    eig_residual: float = 1e-9
    trace: float = 1e-10
    completeness: float = 1e-8
    initial_fidelity: float = 1e-12
    fidelity_excess: float = 1e-12
    overlap_clamp: float = 1e-6
    overlap_roundoff: float = 1e-10
    delta_cutoff_drift: float = 1e-3
    analytic_vs_det: float = 1e-6
    bound_slack: float = 1e-9
    eq23: float = 1e-8
    norm: float = 1e-10
    weight_sum: float = 1e-10
    conservation: float = 1e-12
    parseval: float = 1e-8
    fisher_velocity: float = 1e-3
    log_underflow: float = -700.0

    def updated(self, **overrides):
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})

    def as_dict(self):
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
