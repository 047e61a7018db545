"""Independent confirmation of a certificate through the cohomology of the assembled algebra."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

from .exterior import Multivector, NilpotentOperator
from .lie import (
    assemble_cocycle,
    build_instance_algebra,
    cartan_defect,
    ce_complex,
    central_action,
    check_jacobi,
    exactness_oracle,
    interior,
    is_nilpotent,
)
from .witness import WitnessCertificate, exactness_system_solvable

__all__ = ["OracleReport", "run_oracle"]


@dataclass
class OracleReport:
    jacobi: bool
    nilpotent: bool
    d_squared_zero: bool
    dz_matches: bool
    cartan: bool | None
    omega_closed: bool
    iz_omega_matches: bool
    iz_omega_exact: bool
    system_solvable: bool
    central_nontrivial: bool | None
    central_degree: int | None
    witness_degree: int

    @property
    def passed(self) -> bool:
        return (
            self.jacobi
            and self.nilpotent
            and self.d_squared_zero
            and self.dz_matches
            and self.cartan is not False
            and self.omega_closed
            and self.iz_omega_matches
            and not self.iz_omega_exact
            and not self.system_solvable
            and self.central_nontrivial is not False
        )

    def to_json(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def run_oracle(theta: NilpotentOperator, eps: Sequence, omega: Multivector, cert: WitnessCertificate, full: bool = True) -> OracleReport:
    """Assemble L, the cocycle omega, and check the central class is nonzero.

    ``full=False`` skips the central-action search and the Cartan sweep, which
    dominate the cost for the larger algebras; those fields are then None.
    """
    L = build_instance_algebra(theta, eps, omega)
    n = L.dim
    u, z = L.distinguished["u"], L.distinguished["z"]
    ustar, zstar = Multivector.basis(n, u), Multivector.basis(n, z)
    zvec = [int(i == z) for i in range(n)]
    lift = lambda f: Multivector(n, f.terms)  # noqa: E731

    cx = ce_complex(L, check=False)
    dz = L.d(zstar) == ustar * Multivector.from_vector(list(eps) + [0, 0]) + lift(omega)
    form = assemble_cocycle(L, cert.beta, cert.alpha, cert.gamma)
    closed = not L.d(form)
    target = ustar * lift(cert.alpha) + lift(cert.beta)
    exact = exactness_oracle(L, target, cx) if closed else True
    if full:
        action = central_action(L, cx)
        cartan = not cartan_defect(L, zvec)
    else:
        action = None
        cartan = None
    return OracleReport(
        jacobi=not check_jacobi(L),
        nilpotent=is_nilpotent(L),
        d_squared_zero=cx.check_d_squared(),
        dz_matches=dz,
        cartan=cartan,
        omega_closed=closed,
        iz_omega_matches=interior(zvec, form) == target,
        iz_omega_exact=exact,
        system_solvable=exactness_system_solvable(cert.beta, cert.alpha, eps, omega, theta),
        central_nontrivial=None if action is None else action.nontrivial,
        central_degree=None if action is None else action.degree,
        witness_degree=max(form.grades()),
    )
