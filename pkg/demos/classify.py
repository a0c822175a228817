"""Boundedness classification without running a simulation.

Three sufficient conditions are checked against the model parameters:
a trace-based damping balance (which produces an explicit epsilon
witness), a flux gap alpha chi < min(b, 4c) for the quasi-stationary
system, and plain quadratic damping b > chi for the fully parabolic one.
The boundary trace constant can be supplied or estimated numerically;
the estimate is a lower bound, so a verdict based on it is advisory.

    python3 demos/classify.py
"""

from chemoflux.core import DomainSpec, ModelParams, SourceSpec, build_grid
from chemoflux.regime import (classify_tau0, classify_tau1,
                              estimate_trace_constant, witness_inequalities)


def show(label, verdict):
    names = ", ".join(c.value for c in verdict.satisfied_conditions) or "none"
    print(f"{label:34s} bounded={str(verdict.bounded):5s} via {names}")
    if verdict.witness is not None:
        print(f"{'':34s} witness eps1={verdict.witness.eps1:.4f} "
              f"eps2={verdict.witness.eps2:.4f}")


def main() -> None:
    grid = build_grid(DomainSpec(dim=2, radius=1.0), 256)
    est = estimate_trace_constant(grid, 2)
    print(f"trace constant for the unit disk: {est.value:.4f} ({est.kind})\n")

    p0 = ModelParams(chi=1.0, h=1.0, alpha=1.0, tau=0)
    show("both dampers, b = c = 1:", classify_tau0(p0, SourceSpec(b=1.0, c=1.0), est))
    show("weak dampers, strong wall:",
         classify_tau0(ModelParams(chi=2.0, h=1.0, alpha=1.0, tau=0),
                       SourceSpec(b=0.5, c=0.1), est))
    show("small chi, flux gap:",
         classify_tau0(ModelParams(chi=0.3, h=1.0, alpha=1.0, tau=0),
                       SourceSpec(b=0.5, c=0.1), est))

    p1 = ModelParams(chi=1.0, h=1.0, alpha=1.0, tau=1)
    show("parabolic, b > chi:", classify_tau1(p1, SourceSpec(b=1.5), est))
    show("parabolic, b = chi, c = 0:", classify_tau1(p1, SourceSpec(b=1.0), est))

    v = classify_tau0(p0, SourceSpec(b=1.0, c=1.0), 1.0)
    q1, q2, q3 = witness_inequalities(p0, SourceSpec(b=1.0, c=1.0), 1.0,
                                      v.witness)
    print(f"\nwitness substituted at C = 1: q1 = {q1:.4f} (< 0), "
          f"q2 = {q2:.4f} (<= 0), q3 = {q3:.4f} (> 0)")


if __name__ == "__main__":
    main()
