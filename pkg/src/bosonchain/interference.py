"""Site-number interference between paths sharing a sender and a receiver.

Every path is an engineered chain with a common ``J``. A single boson starts
on the shared sender. Each path is treated as an independent chain whose
first site is that sender, and the receiver amplitudes are summed coherently
at the shared end site. The Z4 signature of each path then decides whether
the arrivals interfere constructively, destructively, or in between.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evolve import Propagator
from .fock import FixedTotal, enumerate_basis
from .model import ChainSpec, build_bose_hubbard
from .transfer import state_transfer_phase

__all__ = ["PathLattice", "IntensityProfile", "run_interference", "interference_factor"]


@dataclass(frozen=True)
class PathLattice:
    """Paths from a common sender (site 1 of each) to a common receiver (site N_p).

    ``amplitudes`` weight the sender boson on each path. The default of all
    ones identifies the sender operators of all paths with one boson.
    """

    paths: tuple
    amplitudes: tuple = None

    def __post_init__(self):
        paths = tuple(self.paths)
        if len(paths) < 2:
            raise ValueError("interference needs at least two paths")
        for p in paths:
            if not isinstance(p, ChainSpec):
                raise TypeError("paths must be ChainSpec instances")
            if not p.is_engineered() or p.epsilon != 0:
                raise ValueError("every path must be an engineered chain with eps = 0")
            if p.U:
                raise ValueError("paths carry a single boson; repulsion is not modelled here")
        Js = {p.J for p in paths}
        if len(Js) != 1:
            raise ValueError(f"paths must share one J to arrive together, got {sorted(Js)}")
        amps = (1.0,) * len(paths) if self.amplitudes is None else tuple(self.amplitudes)
        if len(amps) != len(paths):
            raise ValueError("one amplitude per path")
        object.__setattr__(self, "paths", paths)
        object.__setattr__(self, "amplitudes", tuple(complex(a) for a in amps))

    @classmethod
    def from_lengths(cls, lengths, J=1.0, amplitudes=None):
        return cls(tuple(ChainSpec.engineered(int(N), J=J) for N in lengths), amplitudes)

    @property
    def lengths(self):
        return tuple(p.site_count for p in self.paths)

    @property
    def J(self):
        return self.paths[0].J

    @property
    def t0(self):
        return self.paths[0].t0


@dataclass
class IntensityProfile:
    """Occupations along each path at ``time`` plus the receiver intensity.

    Intensities are in units of the sender occupation with unit mode
    functions. ``interference_factor`` equals the receiver intensity, which
    is 4 for two in-phase unit-weight paths.
    """

    lengths: tuple
    time: float
    per_path: list = field(repr=False)
    receiver_amplitude: complex
    receiver_intensity: float
    initial_intensity: float
    interference_factor: float
    closed_form_factor: float

    @property
    def total_number(self):
        return float(sum(np.sum(p) for p in self.per_path))

    def to_dict(self):
        return {
            "lengths": list(self.lengths),
            "time": self.time,
            "per_path": [list(map(float, p)) for p in self.per_path],
            "receiver_amplitude": self.receiver_amplitude,
            "receiver_intensity": self.receiver_intensity,
            "initial_intensity": self.initial_intensity,
            "interference_factor": self.interference_factor,
            "closed_form_factor": self.closed_form_factor,
        }


def interference_factor(signatures, amplitudes=None):
    """``|sum_p a_p r_p|^2``, with the first path's phase normalized to 1.

    For two unit-weight paths this is ``2 + r + r^*`` with ``r`` the relative
    signature.
    """
    sigs = np.asarray(list(signatures), dtype=complex)
    if sigs.size == 0:
        raise ValueError("need at least one signature")
    amps = np.ones(len(sigs)) if amplitudes is None else np.asarray(amplitudes, dtype=complex)
    rel = sigs / sigs[0]
    return float(abs(np.sum(amps * rel)) ** 2)


def _path_amplitudes(spec: ChainSpec, t):
    basis = enumerate_basis(spec.site_count, FixedTotal(1))
    order = basis.single_particle_indices()
    prop = Propagator(build_bose_hubbard(spec, basis))
    start = np.zeros(basis.dim, dtype=complex)
    start[order[0]] = 1.0
    return prop.evolve(start, t)[order]


def run_interference(lattice: PathLattice, t=None) -> IntensityProfile:
    """Evolve each path and sum the receiver amplitudes coherently.

    ``t`` defaults to the common transfer time ``pi / J``.
    """
    t = lattice.t0 if t is None else float(t)
    amps = np.asarray(lattice.amplitudes)
    per_path, receiver = [], 0j
    for a, spec in zip(amps, lattice.paths):
        site_amps = a * _path_amplitudes(spec, t)
        per_path.append(np.abs(site_amps) ** 2)
        receiver += site_amps[-1]
    intensity = float(abs(receiver) ** 2)
    return IntensityProfile(
        lengths=lattice.lengths,
        time=t,
        per_path=per_path,
        receiver_amplitude=complex(receiver),
        receiver_intensity=intensity,
        initial_intensity=float(abs(np.sum(amps)) ** 2),
        interference_factor=intensity,
        # arriving amplitudes carry conj(r); identical to r for real weights
        closed_form_factor=interference_factor([state_transfer_phase(N) for N in lattice.lengths], amps),
    )
