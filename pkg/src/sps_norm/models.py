"""Emitter presets: every source the norm criterion gets applied to.

Each builder returns an EmitterPreset bundling the Lindblad model, the
named emission operators, and the rotating-frame reference frequency. All
coherent drives are eliminated by rotating at the laser frequency, so
Hamiltonians are time independent and sensors are detuned accordingly.
"""
from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import TruncationError, ValidationError
from .hilbert import (
    ComplexOperator,
    HilbertSpace,
    bosonic_lowering,
    embed,
    two_level_lowering,
)
from .lindblad import (
    CascadedPair,
    Dissipator,
    LindbladModel,
    build_liouvillian,
    steady_state,
    unfiltered_gk,
)

TRUNCATION_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class EmitterPreset:
    name: str
    parameters: dict
    model: LindbladModel
    emission_ops: dict[str, ComplexOperator]
    default_emission: str
    frame_frequency: float = 0.0

    def emission(self, name: str | None = None) -> ComplexOperator:
        key = self.default_emission if name is None else name
        if key not in self.emission_ops:
            raise ValidationError(
                f"unknown emission op {key!r}; preset {self.name} offers "
                f"{sorted(self.emission_ops)}"
            )
        return self.emission_ops[key]


def _zero_op(space: HilbertSpace) -> ComplexOperator:
    n = space.total_dim
    return ComplexOperator(space, sp.csr_matrix((n, n), dtype=np.complex128))


def incoherent_2ls(P: float = 0.01, gamma: float = 1.0) -> EmitterPreset:
    """2LS pumped incoherently at rate P; H = 0 in the emitter frame."""
    if gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if P < 0:
        raise ValidationError(f"pump must be >= 0, got {P}")
    sig = two_level_lowering()
    space = sig.space
    model = LindbladModel(
        space,
        _zero_op(space),
        (Dissipator(gamma, sig), Dissipator(P, sig.dagger())),
    )
    return EmitterPreset(
        name="incoherent-2ls",
        parameters={"P": P, "gamma": gamma},
        model=model,
        emission_ops={"sigma": sig},
        default_emission="sigma",
    )


def coherent_2ls(Omega: float = 0.01, gamma: float = 1.0,
                 detuning: float = 0.0) -> EmitterPreset:
    """Resonance fluorescence in the laser frame."""
    if gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    sig = two_level_lowering()
    space = sig.space
    h = detuning * (sig.dagger() @ sig) + Omega * (sig + sig.dagger())
    model = LindbladModel(space, h, (Dissipator(gamma, sig),))
    return EmitterPreset(
        name="coherent-2ls",
        parameters={"Omega": Omega, "gamma": gamma, "detuning": detuning},
        model=model,
        emission_ops={"sigma": sig},
        default_emission="sigma",
    )


def biexciton(omega: float = 0.0, chi: float = 40.0, Omega: float = 10.0,
              gamma: float = 1.0) -> EmitterPreset:
    """Biexciton cascade driven through the vertical polarization.

    In the frame rotating at the exciton/laser frequency omega:
    H = -chi n_up n_down + Omega (sV+ + sV), with sV = (s_up + s_down)/sqrt(2)
    and sH = (s_up - s_down)/sqrt(2). The binding energy chi puts the
    two-excitation level at 2*omega - chi in the lab frame.
    """
    if gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    space = HilbertSpace((2, 2))
    sig = two_level_lowering()
    s_up = embed(sig, space, 0)
    s_dn = embed(sig, space, 1)
    s_v = (s_up + s_dn) * (1.0 / math.sqrt(2.0))
    s_h = (s_up - s_dn) * (1.0 / math.sqrt(2.0))
    n_up = s_up.dagger() @ s_up
    n_dn = s_dn.dagger() @ s_dn
    h = (-chi) * (n_up @ n_dn) + Omega * (s_v.dagger() + s_v)
    model = LindbladModel(
        space, h, (Dissipator(gamma, s_up), Dissipator(gamma, s_dn))
    )
    return EmitterPreset(
        name="biexciton",
        parameters={"omega": omega, "chi": chi, "Omega": Omega, "gamma": gamma},
        model=model,
        emission_ops={"V": s_v, "H": s_h},
        default_emission="V",
        frame_frequency=omega,
    )


def _capped_pair_ops(n_max: int, total_cap: int):
    """Two bosonic modes on the joint basis {(na, nb): na+nb <= total_cap}."""
    states = [
        (i, j)
        for i in range(n_max + 1)
        for j in range(n_max + 1)
        if i + j <= total_cap
    ]
    index = {s: r for r, s in enumerate(states)}
    D = len(states)
    a = sp.lil_matrix((D, D), dtype=np.complex128)
    b = sp.lil_matrix((D, D), dtype=np.complex128)
    for (i, j), r in index.items():
        if i > 0:
            a[index[(i - 1, j)], r] = math.sqrt(i)
        if j > 0:
            b[index[(i, j - 1)], r] = math.sqrt(j)
    return a.tocsr(), b.tocsr(), D


def polariton_blockade(
    omega: float = 0.275,
    g: float = 3.0,
    U: float = 0.0425,
    Omega_a: float = 0.05,
    omega_L: float = 0.0,
    gamma_a: float = 1.0,
    gamma_b: float = 1.0,
    n_max: int = 6,
    total_cap: int | None = None,
    verify_order: int | None = None,
) -> EmitterPreset:
    """Driven coupled nonlinear modes; g = 0 keeps only polaritons a.

    With total_cap set, the two modes live on a joint basis capped at
    na + nb <= total_cap (one composite tensor factor), which is what makes
    high-order filtered correlators affordable; the physics is unchanged
    once the truncation check passes.
    """
    if gamma_a <= 0 or gamma_b <= 0:
        raise ValidationError("mode decay rates must be positive")
    if n_max < 3:
        raise ValidationError(f"n_max must be >= 3, got {n_max}")
    delta = omega - omega_L
    params = {
        "omega": omega, "g": g, "U": U, "Omega_a": Omega_a, "omega_L": omega_L,
        "gamma_a": gamma_a, "gamma_b": gamma_b, "n_max": n_max,
    }
    if g == 0.0:
        # mode b decouples and stays in vacuum; drop it
        a = bosonic_lowering(n_max + 1)
        space = a.space
        ad = a.dagger()
        h = delta * (ad @ a) + U * (ad @ ad @ a @ a) + Omega_a * (a + ad)
        model = LindbladModel(space, h, (Dissipator(gamma_a, a),))
        ops = {"a": a}
    elif total_cap is not None:
        params["total_cap"] = total_cap
        a_m, b_m, D = _capped_pair_ops(n_max, total_cap)
        space = HilbertSpace((D,))
        a = ComplexOperator(space, a_m)
        b = ComplexOperator(space, b_m)
        ad, bd = a.dagger(), b.dagger()
        h = (
            delta * (ad @ a + bd @ b)
            + g * (ad @ b + bd @ a)
            + U * (ad @ ad @ a @ a + bd @ bd @ b @ b)
            + Omega_a * (a + ad)
        )
        model = LindbladModel(
            space, h, (Dissipator(gamma_a, a), Dissipator(gamma_b, b))
        )
        ops = {"a": a, "b": b}
    else:
        space = HilbertSpace((n_max + 1, n_max + 1))
        a = embed(bosonic_lowering(n_max + 1), space, 0)
        b = embed(bosonic_lowering(n_max + 1), space, 1)
        ad, bd = a.dagger(), b.dagger()
        h = (
            delta * (ad @ a + bd @ b)
            + g * (ad @ b + bd @ a)
            + U * (ad @ ad @ a @ a + bd @ bd @ b @ b)
            + Omega_a * (a + ad)
        )
        model = LindbladModel(
            space, h, (Dissipator(gamma_a, a), Dissipator(gamma_b, b))
        )
        ops = {"a": a, "b": b}
    preset = EmitterPreset(
        name="blockade-conventional" if g == 0.0 else "blockade-unconventional",
        parameters=params,
        model=model,
        emission_ops=ops,
        default_emission="a",
        frame_frequency=omega_L,
    )
    if verify_order is not None:
        verify_truncation(preset, "a", verify_order)
    return preset


def cascaded_2ls(
    Omega: float = 0.01,
    gamma_1: float = 1.0,
    gamma_2: float = 1.0,
    stages: int = 2,
) -> EmitterPreset:
    """Chain of 2LS; the first is driven, each output feeds everything
    downstream through cascaded cross-terms (no back-action).

    stages > 2 reuse gamma_2 for every later emitter; the two-stage case is
    the validated one.
    """
    if gamma_1 <= 0 or gamma_2 <= 0:
        raise ValidationError("decay rates must be positive")
    if stages < 2:
        raise ValidationError(f"a cascade needs >= 2 stages, got {stages}")
    space = HilbertSpace((2,) * stages)
    sig = two_level_lowering()
    sigs = [embed(sig, space, i) for i in range(stages)]
    rates = [gamma_1] + [gamma_2] * (stages - 1)
    h = Omega * (sigs[0] + sigs[0].dagger())
    pairs = tuple(
        CascadedPair(sigs[i], sigs[j], rates[i], rates[j])
        for i in range(stages)
        for j in range(i + 1, stages)
    )
    model = LindbladModel(
        space, h,
        tuple(Dissipator(r, s) for r, s in zip(rates, sigs)),
        cascaded_pairs=pairs,
    )
    ops = {f"sigma_{i + 1}": s for i, s in enumerate(sigs)}
    ops["source"] = sigs[0]
    ops["target"] = sigs[-1]
    return EmitterPreset(
        name="cascade-2ls",
        parameters={"Omega": Omega, "gamma_1": gamma_1, "gamma_2": gamma_2,
                    "stages": stages},
        model=model,
        emission_ops=ops,
        default_emission="target",
    )


def twolevel_in_cavity(
    g_c: float = 1.0,
    kappa: float = 100.0,
    gamma: float = 1.0,
    Omega: float = 0.01,
    n_max: int = 3,
    verify_order: int | None = None,
) -> EmitterPreset:
    """Driven 2LS weakly coupled to a fast-decaying cavity; emission = cavity."""
    if g_c < 0:
        raise ValidationError(f"coupling must be >= 0, got {g_c}")
    if kappa <= 0 or gamma <= 0:
        raise ValidationError("decay rates must be positive")
    if n_max < 2:
        raise ValidationError(f"cavity needs n_max >= 2, got {n_max}")
    space = HilbertSpace((2, n_max + 1))
    sig = embed(two_level_lowering(), space, 0)
    a = embed(bosonic_lowering(n_max + 1), space, 1)
    h = g_c * (a.dagger() @ sig + sig.dagger() @ a) + Omega * (sig.dagger() + sig)
    model = LindbladModel(
        space, h, (Dissipator(kappa, a), Dissipator(gamma, sig))
    )
    preset = EmitterPreset(
        name="2ls-cavity",
        parameters={"g_c": g_c, "kappa": kappa, "gamma": gamma, "Omega": Omega,
                    "n_max": n_max},
        model=model,
        emission_ops={"a": a, "sigma": sig},
        default_emission="a",
    )
    if verify_order is not None:
        verify_truncation(preset, "a", verify_order)
    return preset


def _unfiltered_order(preset: EmitterPreset, emission: str, order: int) -> float:
    rho = steady_state(build_liouvillian(preset.model))
    return unfiltered_gk(rho, preset.emission(emission), order)


def bumped_preset(preset: EmitterPreset, step: int = 2) -> EmitterPreset:
    """The same preset with every bosonic cap raised by `step`."""
    params = dict(preset.parameters)
    if "n_max" not in params:
        raise ValidationError(f"{preset.name} has no truncation to verify")
    params["n_max"] += step
    if "total_cap" in params:
        params["total_cap"] += step
    return _BUILDERS[preset.name](**params)


def verify_truncation(preset: EmitterPreset, emission: str, order: int) -> float:
    """Raise unless bumping the bosonic cap by 2 moves g^(order) by < 1e-6.

    Returns the relative gap on success. Only meaningful for presets with a
    truncated bosonic basis.
    """
    wider = bumped_preset(preset)
    ref = _unfiltered_order(preset, emission, order)
    wide = _unfiltered_order(wider, emission, order)
    gap = abs(wide - ref) / max(abs(wide), 1e-300)
    if gap >= TRUNCATION_RTOL:
        n_max = preset.parameters["n_max"]
        raise TruncationError(
            f"{preset.name}: g^({order}) moves by {gap:.2e} when the cap grows; "
            f"raise n_max to at least {n_max + 2}",
            suggested=n_max + 2,
        )
    return gap


_BUILDERS = {
    "incoherent-2ls": incoherent_2ls,
    "coherent-2ls": coherent_2ls,
    "biexciton": biexciton,
    "blockade-conventional": lambda **kw: polariton_blockade(**{"g": 0.0, **kw}),
    "blockade-unconventional": polariton_blockade,
    "cascade-2ls": cascaded_2ls,
    "2ls-cavity": twolevel_in_cavity,
}

# which model parameter each sweep axis touches, per preset
PRESET_AXES = {
    "incoherent-2ls": {"pump": "P"},
    "coherent-2ls": {"drive": "Omega"},
    "biexciton": {"drive": "Omega", "interaction": "chi"},
    "blockade-conventional": {"drive": "Omega_a", "interaction": "U"},
    "blockade-unconventional": {"drive": "Omega_a", "interaction": "U"},
    "cascade-2ls": {"drive": "Omega"},
    "2ls-cavity": {"drive": "Omega"},
}


def preset_names() -> list[str]:
    return sorted(_BUILDERS)


def build_preset(name: str, overrides: dict | None = None) -> EmitterPreset:
    """Construct a registry preset with keyword overrides validated."""
    if name not in _BUILDERS:
        raise ValidationError(f"unknown preset {name!r}; known: {preset_names()}")
    builder = _BUILDERS[name]
    kwargs = dict(overrides or {})
    target = polariton_blockade if name.startswith("blockade") else builder
    allowed = set(inspect.signature(target).parameters)
    unknown = set(kwargs) - allowed
    if unknown:
        raise ValidationError(
            f"unknown parameter(s) {sorted(unknown)} for preset {name!r}"
        )
    if name == "blockade-conventional" and kwargs.get("g", 0.0) != 0.0:
        raise ValidationError("blockade-conventional requires g = 0")
    return builder(**kwargs)
