"""
Point d'entrée en ligne de commande du laboratoire Malus.
- Analyse des arguments (angles en radians, "theta,phi")
- Exécution via services.experiment_service
- Rapport sur stdout (ou --output), journaux sur stderr

Codes de sortie : 0 succès, 2 configuration invalide, 1 échec numérique.
"""
import argparse
import sys
from typing import Optional, Sequence, Tuple

from config import APP_CONFIG, DISTRIBUTION_IDS, HAMILTONIANS, SUBCOMMANDS
from models.sphere import Direction
from services.experiment_service import RunConfig, run_experiment
from utils.exceptions import ConfigError, DomainError, NumericalError
from utils.logging_utils import configure_logging, get_logger
from views.report_view import ecrire_rapport, formater_rapport


logger = get_logger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


class _Parser(argparse.ArgumentParser):
    """argparse qui lève ConfigError au lieu de quitter le processus"""

    def error(self, message):
        raise ConfigError(message)


def parse_direction(text: str) -> Direction:
    """'theta,phi' en radians, littéraux décimaux uniquement"""
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"réglage attendu sous la forme theta,phi : {text!r}")
    try:
        return Direction(float(parts[0]), float(parts[1]))
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(f"réglage invalide {text!r} : {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="malus", description=APP_CONFIG["subtitle"])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--twice-s", type=int, default=1, help="2s (1 pour un spin 1/2)")
    parser.add_argument("--distribution", choices=list(DISTRIBUTION_IDS), default="uniform")
    parser.add_argument("--settings", type=parse_direction, nargs="*", default=[],
                        metavar="THETA,PHI")
    parser.add_argument("--n-theta", type=int)
    parser.add_argument("--n-phi", type=int)
    parser.add_argument("--format", dest="output_format", choices=["csv", "json"], default="csv")
    parser.add_argument("--output", dest="output_path")
    parser.add_argument("--oracle", choices=["quantum", "quadrature"], default="quantum")
    parser.add_argument("--standard-settings", action="store_true")
    parser.add_argument("--insertions", type=int, nargs="+", default=[0, 1, 2, 3])
    parser.add_argument("--steps", type=int, nargs="+", default=[])
    parser.add_argument("--theta", type=float, default=None, help="colatitude de la boucle")
    parser.add_argument("--levels", type=float, nargs="+", default=[0.5])
    parser.add_argument("--twice-s-values", type=int, nargs="+", default=None)
    parser.add_argument("--alphas", type=float, nargs="+", default=[])
    parser.add_argument("--hamiltonian", choices=HAMILTONIANS["names"], default="precession")
    parser.add_argument("--omega0", type=float, default=HAMILTONIANS["default_omega0"])
    parser.add_argument("--t-end", type=float, default=None)
    parser.add_argument("--step", type=float, default=1e-3)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true")
    verbosity.add_argument("--quiet", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig(
        subcommand=args.subcommand,
        twice_s=args.twice_s,
        distribution=args.distribution,
        settings=list(args.settings),
        n_theta=args.n_theta,
        n_phi=args.n_phi,
        output_format=args.output_format,
        output_path=args.output_path,
        oracle=args.oracle,
        standard_settings=args.standard_settings,
        insertions=list(args.insertions),
        steps=list(args.steps),
        levels=list(args.levels),
        alphas=list(args.alphas),
        hamiltonian=args.hamiltonian,
        omega0=args.omega0,
        step=args.step,
    )
    if args.theta is not None:
        config.theta = args.theta
    if args.twice_s_values:
        config.twice_s_values = list(args.twice_s_values)
    if args.t_end is not None:
        config.t_end = args.t_end
    return config


def run(config: RunConfig, stream=None) -> Tuple[int, Optional[str]]:
    """
    Exécute une configuration et écrit le rapport.

    Returns:
        (code de sortie, texte du rapport ou None)
    """
    try:
        succes, report, message = run_experiment(config)
        text = formater_rapport(report, config.output_format)
    except ConfigError as exc:
        logger.error("Configuration invalide : %s", exc)
        return EXIT_CONFIG, None
    except NumericalError as exc:
        logger.error("Échec numérique : %s", exc)
        return EXIT_NUMERICAL, None

    ecrire_rapport(text, config.output_path, stream)
    if not succes:
        return EXIT_NUMERICAL, text
    logger.info(message)
    return EXIT_OK, text


def main(argv: Optional[Sequence[str]] = None, stream=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        configure_logging()
        logger.error("Arguments invalides : %s", exc)
        return EXIT_CONFIG

    configure_logging("DEBUG" if args.verbose else "WARNING" if args.quiet else None)
    code, _ = run(config_from_args(args), stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
