"""Briefing texts sent to agents at episode start.

The bodies live in assets/*.txt with named placeholders; this module turns an
environment's ``briefing_params()`` dict into the interpolated text.  Number
formatting is part of the contract: initial conditions print as 5-decimal
strings, cost and noise tables as dict literals keyed high/medium/low.
"""

from importlib import resources

from ..errors import ConfigurationError

_FIDELITY_ORDER = ("high", "medium", "low")


def load_asset(name: str) -> str:
    return (
        resources.files("physprobe.harness").joinpath("assets").joinpath(name)
    ).read_text(encoding="utf-8")


def _five(value: float) -> str:
    return f"{float(value):.5f}"


def _quoted_list(values) -> str:
    """['0.87172', '4.01354'] style, matching the briefing texture."""
    return "[" + ", ".join(f"'{_five(v)}'" for v in values) + "]"


def _quoted_pairs(rows) -> str:
    return "[" + ", ".join(_quoted_list(row) for row in rows) + "]"


def _bullet_rows(rows) -> str:
    return "\n".join(f"  - {_quoted_list(row)}" for row in rows)


def _table(mapping: dict) -> str:
    body = ", ".join(f"'{k}': {mapping[k]:g}" for k in _FIDELITY_ORDER)
    return "{" + body + "}"


def render_briefing(kind: str, params: dict) -> str:
    if kind == "classical":
        template = load_asset("classical.txt")
        return template.format(
            num_objects=params["n_objects"],
            dim=params["dim"],
            gravitational_constant=f"{params['G']:g}",
            box_min=[float(v) for v in params["box_lo"]],
            box_max=[float(v) for v in params["box_hi"]],
            masses=_quoted_list(params["masses"]),
            velocities=_bullet_rows(params["velocities"]),
            radii=_quoted_list(params["radii"]),
            budget=float(params["budget"]),
            max_time=f"{params['t_max']:g}",
            costs=_table(params["costs"]),
            noise=_table(params["noise"]),
        )
    if kind == "fluid":
        template = load_asset("fluid.txt")
        shear_info = (
            "The flow begins as a horizontal double shear layer: two opposing "
            "streams separated by interfaces of thickness "
            f"{_five(params['shear_delta'])} at y = L/4 and y = 3L/4, "
            "perturbed vertically with amplitude "
            f"{_five(params['perturbation'])} * sin(2*pi*x/L) localized at the "
            "interfaces."
        )
        return template.format(
            n=params["n"],
            viscosity=f"{params['nu']:g}",
            dt=f"{params['dt']:g}",
            shear_info=shear_info,
            budget=float(params["budget"]),
            max_time=f"{params['t_max']:g}",
            costs=_table(params["costs"]),
            noise=_table(params["noise"]),
        )
    if kind == "quantum":
        template = load_asset("quantum.txt")
        entangled_text = (
            "entangled quantum particles"
            if params["entangled"]
            else "non-entangled quantum particles"
        )
        return template.format(
            entangled_text=entangled_text,
            wall_x=f"{params['wall_x']:.2f}",
            wall_y=f"{params['wall_y']:.2f}",
            h_bar=f"{params['hbar']:g}",
            masses=_quoted_list(params["masses"]),
            velocities=_quoted_pairs(params["velocities"]),
            means=_quoted_pairs(params["means"]),
            stds=_quoted_list(params["stds"]),
            budget=float(params["budget_per_trial"]),
            max_time=f"{params['t_max']:g}",
            max_observations_per_trial=params["max_observations_per_trial"],
            num_trials=params["num_trials"],
            costs=_table(params["costs"]),
            noise=_table(params["noise"]),
        )
    raise ConfigurationError(f"no briefing template for environment kind {kind!r}")


def parameter_inference_addendum() -> str:
    return load_asset("parameter_inference.txt").format()


def system_prompt() -> str:
    """Generic agent-side system instructions, shipped for client use."""
    return load_asset("system.txt")


def strategy_prompt() -> str:
    """Optional agent-side strategy scaffold, shipped for client use."""
    return load_asset("strategy.txt")
