import logging
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union

import typer
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from rich.markup import escape

from diracwg.config import configure_logging, console, get_settings
from diracwg.dirac2d import OPEN_GRID_CELLS, SpectrumReport, asymptotic_report, winning_flux
from diracwg.effective import (
    DEFAULT_FLUX,
    EFFECTIVE_WINDOW,
    EffectiveModel,
    count_negative,
    effective_eigs,
    flux_value,
    full_symbol_matrix,
    max_fourier_window,
    schrodinger_matrix,
)
from diracwg.errors import ArgumentError, DiracWGError, exit_code_for
from diracwg.export import DataExporter
from diracwg.geometry import ClosedCurve, load_geometry
from diracwg.series import series_k1, series_nu1
from diracwg.transverse import mode, nu

logger = logging.getLogger(__name__)

app = typer.Typer(
    help="Spectral toolkit for thin curved Dirac waveguides with infinite-mass boundaries.",
    add_completion=False,
    pretty_exceptions_enable=False,
)

FLUX_ALIASES = {"pip2": "pi+2", "2mpi": "2-pi", "pim2": "pi-2", "πp2": "pi+2", "2mπ": "2-pi", "πm2": "pi-2"}
SYMMETRY_LIMIT = 1e-8
HERMITICITY_LIMIT = 1e-12
RESIDUAL_RATIO = 0.6


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class CommandParameters(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TransverseParameters(CommandParameters):
    mu_range: str
    branch: int = Field(ge=1)


class DispersionParameters(CommandParameters):
    mu: float
    xi_range: str
    branches: int = Field(ge=1)


class SeriesParameters(CommandParameters):
    order: int = Field(ge=0)


class EffectiveParameters(CommandParameters):
    flux: str
    count: int = Field(ge=1)
    resolution: Optional[int] = Field(ge=1)
    model: EffectiveModel
    sign_choice: Literal[1, -1]


class Full2DParameters(CommandParameters):
    jmax: int = Field(ge=1)
    P: int = Field(ge=0)
    Nt: int = Field(ge=1)
    Nq_t: Optional[int] = Field(ge=1)
    check_truncation: bool


class VerifyParameters(CommandParameters):
    jmax: int = Field(ge=1)
    P: int = Field(ge=0)
    Nt: int = Field(ge=1)
    Nq_t: Optional[int] = Field(ge=1)
    workers: Optional[int] = Field(ge=1)
    check_truncation: bool


Parameters = Union[
    TransverseParameters,
    DispersionParameters,
    SeriesParameters,
    EffectiveParameters,
    Full2DParameters,
    VerifyParameters,
]


class RunConfig(BaseModel):
    """Fully resolved parameters of one invocation; recorded in every output file."""

    model_config = ConfigDict(extra="forbid")

    command: str
    geometry: Optional[str] = None
    epsilons: List[float] = Field(default_factory=list)
    m: Optional[float] = None
    parameters: Parameters
    output: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    deterministic: bool = True

    def exporter(self) -> DataExporter:
        return DataExporter(self.model_dump(mode="json"))

    @property
    def output_path(self) -> Optional[Path]:
        return Path(self.output) if self.output else None


def parse_range(text: str) -> List[float]:
    """'a:b:n' -> n evenly spaced values from a to b inclusive."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ArgumentError(f"range must look like a:b:n, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ArgumentError(f"range must look like a:b:n, got {text!r}") from None
    if count < 1 or not (math.isfinite(start) and math.isfinite(stop)):
        raise ArgumentError(f"range needs finite ends and at least one point, got {text!r}")
    if count == 1:
        return [start]
    return [start + (stop - start) * i / (count - 1) for i in range(count)]


def parse_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ArgumentError(f"expected a comma separated list of numbers, got {text!r}") from None
    if not values:
        raise ArgumentError("empty list")
    return values


def resolve_flux(name: str) -> str:
    name = FLUX_ALIASES.get(name, name)
    flux_value(name, 1.0)
    return name


def report_rows(reports: Sequence[SpectrumReport]):
    names = list(reports[0].effective) if reports else []
    header = ["epsilon", "j", "computed"] + [f"predicted_{n}" for n in names] + [f"residual_{n}" for n in names]
    rows = []
    for report in reports:
        for j, value in enumerate(report.computed):
            rows.append(
                [report.epsilon, j + 1, value]
                + [report.predicted[n][j] for n in names]
                + [report.residuals[n][j] for n in names]
            )
    return header, rows


def _emit_table(
    config: RunConfig, header: List[str], rows: List[list], notes: Optional[Dict[str, Any]] = None
) -> None:
    exporter = config.exporter()
    if config.format is OutputFormat.JSON:
        text = exporter.json_text({**(notes or {}), "rows": [dict(zip(header, row)) for row in rows]})
    else:
        text = exporter.csv_text(header, rows, notes)
    exporter.emit(text, config.output_path)


def _emit_reports(config: RunConfig, reports: List[SpectrumReport]) -> None:
    if config.format is OutputFormat.JSON:
        exporter = config.exporter()
        text = exporter.json_text({"reports": [report.model_dump(mode="json") for report in reports]})
        exporter.emit(text, config.output_path)
        return
    header, rows = report_rows(reports)
    notes = {"winning_flux": reports[-1].winning_flux} if reports[-1].winning_flux else None
    _emit_table(config, header, rows, notes)


OutputOption = typer.Option(None, "--output", "-o", help="Write to this file instead of stdout")
FormatOption = typer.Option(OutputFormat.CSV, "--format", help="Output format")


@app.callback()
def main_callback(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr")):
    """Experiments for the Dirac operator on thin curved waveguides."""
    configure_logging(verbose)
    logger.debug("settings: %s", get_settings())


@app.command()
def transverse(
    mu_range: str = typer.Option(..., "--mu-range", help="Mass values as a:b:n"),
    branch: int = typer.Option(1, "--branch", help="Transverse branch index j"),
    output: Optional[Path] = OutputOption,
    fmt: OutputFormat = FormatOption,
):
    """Tabulate k_j(mu) and nu_j(0, mu)."""
    config = RunConfig(
        command="transverse",
        parameters=TransverseParameters(mu_range=mu_range, branch=branch),
        output=str(output) if output else None,
        format=fmt,
    )
    rows = []
    for mu in parse_range(mu_range):
        value = mode(branch, 1, mu)
        rows.append([mu, branch, value.kind.value, value.k, value.nu])

    _emit_table(config, ["mu", "branch", "kind", "k", "nu"], rows)


@app.command()
def dispersion(
    mu: float = typer.Option(..., "--mu", help="Mass parameter"),
    xi_range: str = typer.Option(..., "--xi-range", help="Momenta as a:b:n"),
    branches: int = typer.Option(1, "--branches", help="Number of branches j = 1..J"),
    output: Optional[Path] = OutputOption,
    fmt: OutputFormat = FormatOption,
):
    """Tabulate the dispersion curves nu_j(xi, mu) = sqrt(xi^2 + nu_j(0, mu)^2)."""
    config = RunConfig(
        command="dispersion",
        parameters=DispersionParameters(mu=mu, xi_range=xi_range, branches=branches),
        output=str(output) if output else None,
        format=fmt,
    )
    rows = [[xi, j, nu(j, xi, mu)] for xi in parse_range(xi_range) for j in range(1, branches + 1)]

    _emit_table(config, ["xi", "branch", "nu"], rows)


@app.command()
def series(
    order: int = typer.Option(4, "--order", help="Highest power of mu"),
    output: Optional[Path] = OutputOption,
    fmt: OutputFormat = FormatOption,
):
    """Exact Taylor coefficients of k_1(mu) and nu_1(0, mu) at mu = 0."""
    config = RunConfig(
        command="series", parameters=SeriesParameters(order=order), output=str(output) if output else None, format=fmt
    )
    expansions = [series_k1(order), series_nu1(order)]
    rows = [
        [expansion.name, power, exact, value]
        for expansion in expansions
        for power, (exact, value) in enumerate(zip(expansion.exact_strings(), expansion.coefficients))
    ]

    _emit_table(config, ["quantity", "power", "exact", "value"], rows)


@app.command()
def effective(
    geom: str = typer.Option(..., "--geom", help="Geometry JSON file or inline JSON"),
    flux: str = typer.Option(DEFAULT_FLUX, "--flux", help="Flux candidate: pi+2, 2-pi or pi-2"),
    count: int = typer.Option(5, "--count", help="Number of eigenvalues"),
    resolution: Optional[int] = typer.Option(None, "--resolution", help="Fourier window P or grid cells"),
    model: EffectiveModel = typer.Option(EffectiveModel.SCHRODINGER_TAYLOR, "--model", help="Effective model"),
    eps: Optional[float] = typer.Option(None, "--eps", help="Width parameter (full_symbol_weyl only)"),
    m: float = typer.Option(0.0, "--m", help="Mass (full_symbol_weyl only)"),
    sign_choice: int = typer.Option(1, "--sign-choice", help="Sign of the momentum overlap, +1 or -1"),
    output: Optional[Path] = OutputOption,
    fmt: OutputFormat = FormatOption,
):
    """Lowest eigenvalues of an effective operator, and the negative count N."""
    flux = resolve_flux(flux)
    config = RunConfig(
        command="effective",
        geometry=geom,
        epsilons=[eps] if eps is not None else [],
        m=m,
        parameters=EffectiveParameters(
            flux=flux, count=count, resolution=resolution, model=model, sign_choice=sign_choice
        ),
        output=str(output) if output else None,
        format=fmt,
    )
    curve = load_geometry(geom)
    closed = isinstance(curve, ClosedCurve)
    if resolution is None:
        resolution = min(EFFECTIVE_WINDOW, max_fourier_window(curve)) if closed else OPEN_GRID_CELLS

    negative = None
    if model is EffectiveModel.SCHRODINGER_TAYLOR:
        override = flux_value(flux, curve.length) if closed else None
        op = schrodinger_matrix(curve, resolution, override)
        refined = min(math.ceil(1.5 * resolution), max_fourier_window(curve)) if closed else 2 * resolution
        negative = count_negative(curve, [resolution, refined])
        console.print(f"[green]negative eigenvalues N = {negative}[/green]")
        flux_label = flux if closed else "none"
    else:
        if eps is None:
            raise ArgumentError("--eps is required for the full_symbol_weyl model")
        op = full_symbol_matrix(curve, eps, m, resolution, sign_choice)
        flux_label = "weyl"

    values = effective_eigs(op, count)
    rows = [[model.value, flux_label, eps, m if eps is not None else None, j + 1, value] for j, value in enumerate(values)]

    notes = {"negative_count": negative} if negative is not None else None
    _emit_table(config, ["model", "flux", "epsilon", "m", "j", "lambda"], rows, notes)


@app.command()
def full2d(
    geom: str = typer.Option(..., "--geom", help="Geometry JSON file or inline JSON"),
    eps: float = typer.Option(..., "--eps", help="Width parameter epsilon"),
    m: float = typer.Option(0.0, "--m", help="Mass"),
    jmax: int = typer.Option(3, "--jmax", help="Number of eigenvalues compared"),
    window: int = typer.Option(24, "--P", help="Fourier window"),
    modes: int = typer.Option(8, "--Nt", help="Transverse modes per sign"),
    nq_t: Optional[int] = typer.Option(None, "--nq-t", help="Gauss-Legendre nodes in t"),
    check_truncation: bool = typer.Option(True, "--check-truncation/--no-check-truncation"),
    output: Optional[Path] = OutputOption,
    fmt: OutputFormat = typer.Option(OutputFormat.JSON, "--format", help="Output format"),
):
    """Assemble and diagonalize the 2D operator at one epsilon; print the spectrum report."""
    config = RunConfig(
        command="full2d",
        geometry=geom,
        epsilons=[eps],
        m=m,
        parameters=Full2DParameters(
            jmax=jmax, P=window, Nt=modes, Nq_t=nq_t, check_truncation=check_truncation
        ),
        output=str(output) if output else None,
        format=fmt,
    )
    curve = load_geometry(geom)
    reports = asymptotic_report(curve, m, [eps], jmax, P=window, Nt=modes, Nq_t=nq_t, check_truncation=check_truncation)
    _emit_reports(config, reports)


def _verdicts(curve, reports: List[SpectrumReport]) -> List[tuple]:
    checks = [
        ("spectral symmetry", all(r.symmetry_defect <= SYMMETRY_LIMIT for r in reports)),
        ("hermiticity", all(r.hermiticity_residual <= HERMITICITY_LIMIT for r in reports)),
    ]
    if isinstance(curve, ClosedCurve):
        winners = {winning_flux(r) for r in reports}
        checks.append(("winning flux consistent across epsilon", len(winners) == 1))
        if len(reports) > 1:
            checks.append(("residuals decrease", all(reports[-1].converged or [False])))
            flux = reports[-1].winning_flux
            first, last = abs(reports[0].residuals[flux][0]), abs(reports[-1].residuals[flux][0])
            checks.append((f"r_1(smallest eps) <= {RESIDUAL_RATIO} r_1(largest eps)", last <= RESIDUAL_RATIO * first))
    else:
        needed = count_negative(curve, [OPEN_GRID_CELLS, 2 * OPEN_GRID_CELLS])
        found = len(reports[-1].gap_eigenvalues)
        checks.append((f"positive gap eigenvalues {found} >= N = {needed} >= 1", found >= needed >= 1))
    return checks


@app.command()
def verify(
    geom: str = typer.Option(..., "--geom", help="Geometry JSON file or inline JSON"),
    eps_list: str = typer.Option("0.2,0.1,0.05", "--eps-list", help="Descending epsilons, comma separated"),
    m: float = typer.Option(0.0, "--m", help="Mass"),
    jmax: int = typer.Option(2, "--jmax", help="Number of eigenvalues compared"),
    window: int = typer.Option(24, "--P", help="Fourier window"),
    modes: int = typer.Option(8, "--Nt", help="Transverse modes per sign"),
    nq_t: Optional[int] = typer.Option(None, "--nq-t", help="Gauss-Legendre nodes in t"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Parallel epsilon jobs (default DIRACWG_WORKERS)"),
    check_truncation: bool = typer.Option(True, "--check-truncation/--no-check-truncation"),
    output: Optional[Path] = OutputOption,
    fmt: OutputFormat = FormatOption,
):
    """Run the epsilon sweep and print PASS/FAIL for each asymptotic check."""
    epsilons = parse_list(eps_list)
    config = RunConfig(
        command="verify",
        geometry=geom,
        epsilons=epsilons,
        m=m,
        parameters=VerifyParameters(
            jmax=jmax, P=window, Nt=modes, Nq_t=nq_t, workers=workers, check_truncation=check_truncation
        ),
        output=str(output) if output else None,
        format=fmt,
    )
    curve = load_geometry(geom)
    reports = asymptotic_report(
        curve, m, epsilons, jmax, P=window, Nt=modes, Nq_t=nq_t, workers=workers, check_truncation=check_truncation
    )
    _emit_reports(config, reports)

    failed = False
    for label, passed in _verdicts(curve, reports):
        failed = failed or not passed
        console.print(f"[green]PASS[/green] {label}" if passed else f"[red]FAIL[/red] {label}")
    if reports[-1].winning_flux:
        console.print(f"winning flux: {reports[-1].winning_flux}")
    if failed:
        raise typer.Exit(code=3)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code instead of raising."""
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        # usage errors, --help and typer.Exit all end in SystemExit here
        app(args=args, prog_name="diracwg", standalone_mode=True)
    except SystemExit as exc:
        return _exit_status(exc.code)
    except ValidationError as exc:
        console.print(f"[red]invalid parameters:[/red] {escape(str(exc))}", highlight=False)
        return 2
    except DiracWGError as exc:
        console.print(f"[red]error:[/red] {escape(str(exc))}", highlight=False)
        return exit_code_for(exc)
    return 0


def _exit_status(code: Any) -> int:
    if code is None:
        return 0
    if isinstance(code, int):
        return code
    console.print(escape(str(code)), highlight=False)
    return 1


def main() -> None:
    sys.exit(run())
