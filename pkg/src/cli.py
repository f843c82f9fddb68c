"""Command-line surface: probability, scan, bound, flux and verify.

Energies and masses are given in eV, baselines in light-years. Output goes to
stdout (or ``--out``) as CSV with a commented config header, or as JSON.
Exit status: 0 on success, 1 on a domain error or failed check, 2 on invalid
flags or configuration.
"""
import argparse
import logging
from typing import Callable

import yaml
from pydantic import ValidationError

from src.collapse import damped_probability_matrix, pair_dampings
from src.config import load_settings
from src.constants import constants_from_settings, lightyears_to_natural, natural_to_lightyears
from src.flavor import mixing_from_settings, spectrum_from_settings
from src.flux import detector_flux, ratio_deviation, source_from_settings
from src.models import CollapseParams, Flavor, OutOfWindowError, Settings, Table
from src.observability import (
    geometric_grid,
    max_observable_energy,
    minimal_observability_length,
    observability_window,
    scan_window,
    xi_upper_bound,
)
from src.oracle import CHECKS, run_suite
from src.oscillation import band_averaged_probability, probability_matrix, warn_if_nonrelativistic
from src.report import render, write_output

logger = logging.getLogger(__name__)

RESOLUTIONS = {"low": 14, "medium": 17, "high": 19}
FLAVOR_PAIRS = [(a, b) for a in Flavor for b in Flavor]

# flag dest -> Settings field
_OVERRIDES = {
    "format": "format",
    "out": "out",
    "seed": "seed",
    "E": "energy_ev",
    "L_ly": "baseline_ly",
    "xi": "xi",
    "threshold": "threshold",
    "mixing": "mixing_preset",
    "theta12": "theta12_rad",
    "theta13": "theta13_rad",
    "theta23": "theta23_rad",
    "delta_cp": "delta_cp_rad",
    "dm2_21": "dm2_21_ev2",
    "dm2_32": "dm2_32_ev2",
    "band_width": "band_width",
    "band_samples": "band_samples",
    "e_min": "scan_e_min_ev",
    "e_max": "scan_e_max_ev",
    "e_num": "scan_e_num",
    "l_min_ly": "scan_l_min_ly",
    "l_max_ly": "scan_l_max_ly",
    "l_num": "scan_l_num",
    "pair": "window_pair",
    "resolution": "resolution",
}


# --- Flag parsing ---

def _floats(value: str, count: int) -> tuple[float, ...]:
    parts = value.split(",")
    if len(parts) != count:
        raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {value!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a number in {value!r}") from e


def _masses(value: str) -> tuple[float, ...]:
    return _floats(value, 3)


def _pair(value: str) -> tuple[int, int]:
    j, k = _floats(value, 2)
    if j != int(j) or k != int(k):
        raise argparse.ArgumentTypeError(f"pair indices must be integers, got {value!r}")
    return int(j), int(k)


def _resolution(value: str) -> int:
    if value in RESOLUTIONS:
        return RESOLUTIONS[value]
    try:
        return int(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(
            f"resolution must be one of {sorted(RESOLUTIONS)} or an integer, got {value!r}"
        ) from e


def _add_common(parser: argparse.ArgumentParser, default=None) -> None:
    parser.add_argument("--config", default=default, help="YAML config file (else $NU_COLLAPSE_CONFIG)")
    parser.add_argument("--format", choices=["csv", "json"], default=default)
    parser.add_argument("--out", default=default, help="Write output here instead of stdout")
    parser.add_argument("--seed", type=int, default=default)
    parser.add_argument(
        "--verbose", "-v", action="store_true",
        default=False if default is None else default,
        help="Enable debug logging",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Neutrino oscillations with gravity-induced collapse damping",
        allow_abbrev=False,
    )
    _add_common(parser)

    # repeated on each subcommand so global flags work in either position
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _add_common(common, default=argparse.SUPPRESS)

    physics = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    physics.add_argument("--xi", type=float, help="Collapse strength")
    physics.add_argument("--m", type=_masses, help="Masses m1,m2,m3 in eV")
    physics.add_argument("--dm2-21", type=float, help="Splitting m2^2 - m1^2 in eV^2")
    physics.add_argument("--dm2-32", type=float, help="Splitting m3^2 - m2^2 in eV^2")
    physics.add_argument("--mixing", choices=["standard", "tribimaximal"])
    physics.add_argument("--theta12", type=float, help="Mixing angle in radians")
    physics.add_argument("--theta13", type=float, help="Mixing angle in radians")
    physics.add_argument("--theta23", type=float, help="Mixing angle in radians")
    physics.add_argument("--delta-cp", type=float, help="CP phase in radians")

    point = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    point.add_argument("--E", type=float, help="Energy in eV")
    point.add_argument("--L-ly", type=float, help="Baseline in light-years")

    subparsers = parser.add_subparsers(dest="command", required=True)

    probability = subparsers.add_parser(
        "probability", parents=[common, physics, point], allow_abbrev=False,
        help="Undamped and damped probability matrices with per-pair damping",
    )
    probability.add_argument("--band-width", type=float, help="Relative energy half-width")
    probability.add_argument("--band-samples", type=int)

    scan = subparsers.add_parser(
        "scan", parents=[common, physics], allow_abbrev=False,
        help="Geometric (E, L) grid scan as plot-ready CSV",
    )
    scan.add_argument("--e-min", type=float)
    scan.add_argument("--e-max", type=float)
    scan.add_argument("--e-num", type=int)
    scan.add_argument("--l-min-ly", type=float)
    scan.add_argument("--l-max-ly", type=float)
    scan.add_argument("--l-num", type=int)
    scan.add_argument("--pair", type=_pair, help="Mass pair j,k used for the window columns")

    bound = subparsers.add_parser(
        "bound", parents=[common, physics, point], allow_abbrev=False,
        help="Upper bound on xi and the observable (E, L) window",
    )
    bound.add_argument("--threshold", type=float, help="Damping exponent that counts as observed")
    bound.add_argument("--pair", type=_pair)

    subparsers.add_parser(
        "flux", parents=[common, physics, point], allow_abbrev=False,
        help="Source and detector flavor ratios",
    )

    verify = subparsers.add_parser(
        "verify", parents=[common], allow_abbrev=False,
        help="Run the oracle cross-checks",
    )
    verify.add_argument("--resolution", type=_resolution, help="low, medium, high or log2 of Sobol points")
    verify.add_argument(
        "--only", action="append",
        help=f"Comma-separated subset of {', '.join(CHECKS)} (repeatable)",
    )
    return parser


def resolve_settings(args: argparse.Namespace) -> Settings:
    """Defaults, then the config file, then flags."""
    overrides = {
        field: getattr(args, dest)
        for dest, field in _OVERRIDES.items()
        if getattr(args, dest, None) is not None
    }
    masses = getattr(args, "m", None)
    if masses is not None:
        overrides.update(m1_ev=masses[0], m2_ev=masses[1], m3_ev=masses[2])
    settings = load_settings(args.config, overrides)
    if masses is not None:
        # explicit masses imply their own splittings unless those are given too
        settings = Settings(
            **{
                **settings.model_dump(),
                "dm2_21_ev2": getattr(args, "dm2_21", None),
                "dm2_32_ev2": getattr(args, "dm2_32", None),
            }
        )
    return settings


def _only(args: argparse.Namespace) -> list[str] | None:
    if not getattr(args, "only", None):
        return None
    return [name.strip() for value in args.only for name in value.split(",") if name.strip()]


# --- Commands ---

def _matrix_rows(label: str, p) -> list[list]:
    return [
        [label, alpha.label, *(float(p[alpha, beta]) for beta in Flavor)]
        for alpha in Flavor
    ]


def cmd_probability(settings: Settings, args: argparse.Namespace) -> tuple[list[Table], int]:
    constants = constants_from_settings(settings)
    u = mixing_from_settings(settings)
    spectrum = spectrum_from_settings(settings)
    params = CollapseParams(xi=settings.xi, constants=constants)
    E = settings.energy_ev
    L = lightyears_to_natural(settings.baseline_ly, constants)
    warn_if_nonrelativistic(spectrum, E)

    columns = ["matrix", "from", "to_e", "to_mu", "to_tau"]
    probabilities = Table(
        name="probabilities",
        columns=columns,
        rows=_matrix_rows("undamped", probability_matrix(u, spectrum, E, L))
        + _matrix_rows("damped", damped_probability_matrix(u, spectrum, E, L, params)),
    )
    pairs = Table(
        name="pairs",
        columns=["pair", "dm2_eV2", "D_ly", "gamma"],
        rows=[
            [
                f"{d.j}{d.k}",
                spectrum.dm2(d.j, d.k),
                None if d.onset_D is None else natural_to_lightyears(d.onset_D, constants),
                d.exponent,
            ]
            for d in pair_dampings(spectrum, E, L, params)
        ],
    )
    tables = [probabilities, pairs]

    if settings.band_width > 0 and settings.band_samples > 1:
        band = [
            band_averaged_probability(
                u, spectrum, E, settings.band_width, L, alpha, beta, settings.band_samples
            )
            for alpha, beta in FLAVOR_PAIRS
        ]
        tables.append(
            Table(
                name="band",
                columns=columns,
                rows=[["band_undamped", a.label, *band[3 * a : 3 * a + 3]] for a in Flavor],
            )
        )
    return tables, 0


def scan_columns() -> list[str]:
    entries = [f"P_{a.label}{b.label}" for a, b in FLAVOR_PAIRS]
    return (
        ["E_eV", "L_ly", "dm2_eV2", "D_ly", "gamma_12", "gamma_13", "gamma_23"]
        + [f"{e}_u" for e in entries]
        + [f"{e}_d" for e in entries]
        + ["deviation"]
    )


def cmd_scan(settings: Settings, args: argparse.Namespace) -> tuple[list[Table], int]:
    grid = scan_window(
        mixing_from_settings(settings),
        spectrum_from_settings(settings),
        settings.xi,
        geometric_grid(settings.scan_e_min_ev, settings.scan_e_max_ev, settings.scan_e_num),
        geometric_grid(settings.scan_l_min_ly, settings.scan_l_max_ly, settings.scan_l_num),
        source_from_settings(settings),
        settings.window_pair,
        constants_from_settings(settings),
    )
    rows = [
        [
            cell.energy_eV,
            cell.baseline_ly,
            cell.matched_dm2,
            cell.onset_D_ly,
            cell.gammas["12"],
            cell.gammas["13"],
            cell.gammas["23"],
            *(float(v) for v in cell.p_undamped.ravel()),
            *(float(v) for v in cell.p_damped.ravel()),
            cell.deviation,
        ]
        for cell in grid.cells
    ]
    return [Table(name="rows", columns=scan_columns(), rows=rows)], 0


def cmd_bound(settings: Settings, args: argparse.Namespace) -> tuple[list[Table], int]:
    constants = constants_from_settings(settings)
    spectrum = spectrum_from_settings(settings)
    j, k = settings.window_pair
    m_j, m_k = spectrum.mass(j), spectrum.mass(k)
    E = settings.energy_ev
    L = lightyears_to_natural(settings.baseline_ly, constants)

    try:
        bound: float | str = xi_upper_bound(m_j, m_k, E, L, settings.threshold, constants)
        code = 0
    except OutOfWindowError as e:
        logger.warning(str(e))
        bound, code = "unbounded", 1

    e_star = max_observable_energy(m_j, m_k, constants)
    l_min_ly = window_e_max = None
    if settings.xi > 0:
        l_min_ly = natural_to_lightyears(
            minimal_observability_length(m_j, m_k, settings.xi, constants), constants
        )
        try:
            window = observability_window(m_j, m_k, settings.xi, settings.baseline_ly, constants)
            window_e_max = window.energy_range[1]
        except OutOfWindowError as e:
            logger.info(f"No observable window at xi = {settings.xi}: {e}")

    rows = [
        ["pair", f"{j}{k}"],
        ["m_j_eV", m_j],
        ["m_k_eV", m_k],
        ["E_eV", E],
        ["L_ly", settings.baseline_ly],
        ["threshold", settings.threshold],
        ["xi_bound", bound],
        ["E_star_eV", e_star],
        ["xi", settings.xi],
        ["L_min_ly", l_min_ly],
        ["window_E_max_eV", window_e_max],
    ]
    return [Table(name="bound", columns=["quantity", "value"], rows=rows)], code


def cmd_flux(settings: Settings, args: argparse.Namespace) -> tuple[list[Table], int]:
    constants = constants_from_settings(settings)
    u = mixing_from_settings(settings)
    spectrum = spectrum_from_settings(settings)
    params = CollapseParams(xi=settings.xi, constants=constants)
    E = settings.energy_ev
    L = lightyears_to_natural(settings.baseline_ly, constants)
    warn_if_nonrelativistic(spectrum, E)

    source = source_from_settings(settings)
    undamped = detector_flux(probability_matrix(u, spectrum, E, L), source)
    damped = detector_flux(damped_probability_matrix(u, spectrum, E, L, params), source)
    deviation = ratio_deviation(undamped, damped)

    ratios = Table(
        name="ratios",
        columns=["flux", "phi_e", "phi_mu", "phi_tau"],
        rows=[
            [label, *(float(v) for v in flux.normalized().as_array())]
            for label, flux in (("source", source), ("undamped", undamped), ("damped", damped))
        ],
    )
    summary = Table(name="summary", columns=["quantity", "value"], rows=[["deviation", deviation]])
    return [ratios, summary], 0


def cmd_verify(settings: Settings, args: argparse.Namespace) -> tuple[list[Table], int]:
    reports = run_suite(settings, _only(args))
    rows = [
        [r.name, "pass" if r.passed else "FAIL", r.primary, r.oracle, r.relative_error, r.tolerance, r.note]
        for r in reports
    ]
    table = Table(
        name="checks",
        columns=["check", "status", "primary", "oracle", "relative_error", "tolerance", "note"],
        rows=rows,
    )
    return [table], 0 if all(r.passed for r in reports) else 1


COMMANDS: dict[str, Callable[[Settings, argparse.Namespace], tuple[list[Table], int]]] = {
    "probability": cmd_probability,
    "scan": cmd_scan,
    "bound": cmd_bound,
    "flux": cmd_flux,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )

    unknown = set(_only(args) or []) - set(CHECKS)
    if unknown:
        parser.error(f"unknown checks {sorted(unknown)}; choose from {', '.join(CHECKS)}")

    try:
        settings = resolve_settings(args)
    except (ValidationError, ValueError, yaml.YAMLError) as e:
        logger.error(f"Invalid configuration: {e}")
        return 2

    try:
        tables, code = COMMANDS[args.command](settings, args)
    except (ValueError, RuntimeError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1

    write_output(render(tables, settings), settings.out)
    return code
