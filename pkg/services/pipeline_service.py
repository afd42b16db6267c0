"""
Proof pipeline: runs the stages in dependency order and persists certificates.

    equilibria -> eigen -> manifolds -> connection

Each stage reads its inputs from the current report (or from the stage's
certificate file in the output directory) and raises
MissingCertificateError when they are absent. The report is rewritten after
every stage; wall-clock timings go to a separate file so reports of equal
configurations are byte-identical.
"""
import csv
import io
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional

import numpy as np

from dependencies.config import PipelineConfig, write_config
from dependencies.services import get_connection_service, get_manifold_service, get_point_proof_service
from models import (
    ConnectionCertificate,
    EigenCertificate,
    EquilibriumCertificate,
    ManifoldCertificate,
    ProofReport,
    StageRecord,
)
from numerics import __version__
from numerics.seqspace import seq_from_json
from services.errors import MissingCertificateError, ProofError
from services.manifold_service import ManifoldData, load_manifold, select_eigenpairs
from services.pointproof_service import EQUILIBRIA
from services.storage import StorageInterface

logger = logging.getLogger(__name__)

STAGES = ("equilibria", "eigen", "manifolds", "connection")
DEPENDS_ON = {
    "equilibria": [],
    "eigen": ["equilibria"],
    "manifolds": ["equilibria", "eigen"],
    "connection": ["equilibria", "manifolds"],
}
CERTIFICATE_FILES = {
    "equilibria": "equilibria.json",
    "eigen": "eigen.json",
    "manifolds": "manifolds.json",
    "connection": "connection.json",
}
TIMINGS_FILE = "timings.json"
RESOLVED_CONFIG = "resolved.toml"


class PipelineService:
    """Stage orchestration, certificate persistence and exports"""

    def __init__(self, config: PipelineConfig, storage: StorageInterface):
        self.config = config
        self.storage = storage
        self.points = get_point_proof_service(config)
        self.manifold = get_manifold_service(config)
        self.connection = get_connection_service(config)
        self.report = self._load_report()
        self.timings: dict[str, float] = {}

    # -- report -----------------------------------------------------------------

    def _load_report(self) -> ProofReport:
        name = self.config.output.report_name
        if self.storage.exists(name):
            report = ProofReport.model_validate(self.storage.load_json(name))
            # certificates from a different configuration are not reused
            if report.config == self.config.snapshot():
                return report
            logger.info("existing report was produced with another configuration; starting afresh")
        return ProofReport(version=__version__, config=self.config.snapshot())

    def save_report(self) -> None:
        self.storage.save_text(self.report.to_json(), self.config.output.report_name)
        self.storage.save_json(self.timings, TIMINGS_FILE)

    def _record(self, name: str, status: str, message: str = "") -> None:
        record = StageRecord(name=name, status=status, depends_on=DEPENDS_ON[name], message=message)
        stages = [s for s in self.report.stages if s.name != name] + [record]
        self.report.stages = sorted(stages, key=lambda s: STAGES.index(s.name))

    # -- upstream certificates ---------------------------------------------------------

    def _require(self, stage: str, current: list, model) -> list:
        if current:
            return current
        file_name = CERTIFICATE_FILES[stage]
        if self.storage.exists(file_name):
            data = self.storage.load_json(file_name)
            if isinstance(data, dict):
                data = [data]
            return [model.model_validate(d) for d in data]
        raise MissingCertificateError(f"no {stage} certificates found; run the {stage} stage first")

    def equilibria(self) -> list[EquilibriumCertificate]:
        return self._require("equilibria", self.report.equilibria, EquilibriumCertificate)

    def eigenpairs(self) -> list[EigenCertificate]:
        return self._require("eigen", self.report.eigenpairs, EigenCertificate)

    def manifolds(self) -> list[ManifoldCertificate]:
        return self._require("manifolds", self.report.manifolds, ManifoldCertificate)

    # -- stages ---------------------------------------------------------------------

    def run_equilibria(self) -> list[EquilibriumCertificate]:
        certs = [self.points.validate_equilibrium(name, c) for name, c in EQUILIBRIA.items()]
        self.report.equilibria = certs
        self.storage.save_json([c.model_dump(mode="json") for c in certs], CERTIFICATE_FILES["equilibria"])
        return certs

    def run_eigen(self) -> list[EigenCertificate]:
        certs: list[EigenCertificate] = []
        for eq in self.equilibria():
            certs.extend(self.points.validate_eigenpairs(eq))
        self.report.eigenpairs = certs
        self.storage.save_json([c.model_dump(mode="json") for c in certs], CERTIFICATE_FILES["eigen"])
        return certs

    def manifold_data(self) -> list[ManifoldData]:
        """Unstable manifolds of equilibria with two unstable eigenvalues, stable ones likewise."""
        eigenpairs = self.eigenpairs()
        data = []
        for eq in self.equilibria():
            for side in ("unstable", "stable"):
                if sum(1 for e in eigenpairs if e.equilibrium == eq.name and e.stability == side) == 2:
                    data.append(select_eigenpairs(side, eq, eigenpairs))
        return data

    def run_manifolds(self) -> list[ManifoldCertificate]:
        data = self.manifold_data()
        with ThreadPoolExecutor(max_workers=self.config.manifold.workers) as pool:
            certs = list(pool.map(self.manifold.validate, data))
        self.report.manifolds = certs
        self.storage.save_json([c.model_dump(mode="json") for c in certs], CERTIFICATE_FILES["manifolds"])
        return certs

    def chart_pair(self) -> tuple[ManifoldCertificate, ManifoldCertificate]:
        manifolds = self.manifolds()
        unstable = [m for m in manifolds if m.side == "unstable"]
        stable = [m for m in manifolds if m.side == "stable"]
        if len(unstable) != 1 or len(stable) != 1:
            raise MissingCertificateError("the connection needs exactly one unstable and one stable manifold certificate")
        return unstable[0], stable[0]

    def run_connection(self) -> ConnectionCertificate:
        P_cert, Q_cert = self.chart_pair()
        cert = self.connection.validate(P_cert, Q_cert, self.equilibria())
        self.report.connection = cert
        self.storage.save_json(cert.model_dump(mode="json"), CERTIFICATE_FILES["connection"])
        return cert

    def run_stage(self, name: str):
        runner: Callable = {
            "equilibria": self.run_equilibria,
            "eigen": self.run_eigen,
            "manifolds": self.run_manifolds,
            "connection": self.run_connection,
        }[name]
        logger.info("stage %s: starting", name)
        start = time.perf_counter()
        try:
            result = runner()
        except ProofError as exc:
            self.timings[name] = time.perf_counter() - start
            self._record(name, "failure", str(exc))
            raise
        self.timings[name] = time.perf_counter() - start
        self._record(name, "success")
        logger.info("stage %s: success in %.2f s", name, self.timings[name])
        return result

    def run(self, stages: Iterable[str] = STAGES) -> ProofReport:
        """Run stages in order; abort on the first failure, marking the rest skipped."""
        stages = [s for s in STAGES if s in set(stages)]
        try:
            for k, name in enumerate(stages):
                try:
                    self.run_stage(name)
                except ProofError:
                    for later in stages[k + 1:]:
                        self._record(later, "skipped", f"{name} failed")
                    raise
        finally:
            self.save_report()
        return self.report

    # -- tuning -----------------------------------------------------------------------

    def tune(self) -> PipelineConfig:
        """Resolve every "auto" value, write resolved.toml and return the resolved config."""
        config = self.config
        if not self.report.equilibria:
            self.run_stage("equilibria")
        if not self.report.eigenpairs:
            self.run_stage("eigen")
        scales = {}
        for data in self.manifold_data():
            key = "scale_u" if data.side == "unstable" else "scale_s"
            current = getattr(config.manifold, key)
            scales[key] = current if current is not None else self.manifold.tune(data)
        config = config.model_copy(update={"manifold": config.manifold.model_copy(update=scales)})

        self._reconfigure(config)
        self.run_stage("manifolds")
        P_cert, Q_cert = self.chart_pair()
        c0 = next(e for e in self.equilibria() if e.name == Q_cert.equilibrium)
        resolved = self.connection.tune(P_cert, Q_cert, c0)
        config = config.model_copy(
            update={
                "orbit": config.orbit.model_copy(
                    update={"alpha0": resolved["alpha0"], "tau": resolved["tau"], "K": resolved["K"]}
                )
            }
        )
        self._reconfigure(config)
        path = write_config(config, self.storage.path_for(RESOLVED_CONFIG))
        self.save_report()
        logger.info("resolved configuration written to %s", path)
        return config

    def _reconfigure(self, config: PipelineConfig) -> None:
        self.config = config
        self.manifold = get_manifold_service(config)
        self.connection = get_connection_service(config)
        self.report.config = config.snapshot()

    # -- exports -----------------------------------------------------------------------

    def export_trajectory(self, stage: str = "connection", n: Optional[int] = None) -> str:
        """CSV text of the orbit (s,t,x,y,z) or of a manifold boundary curve (alpha,x,y,z)."""
        n = n or self.config.output.n_plot
        if stage == "connection":
            cert = self.report.connection
            if cert is None:
                cert = self._require("connection", [], ConnectionCertificate)[0]
            return orbit_csv(cert, n)
        for m in self.manifolds():
            if m.name == stage or m.side == stage:
                return manifold_boundary_csv(m, n)
        raise MissingCertificateError(f"no certificate named {stage!r} to export")


def _csv(header: list[str], rows: np.ndarray) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
    return buffer.getvalue()


def orbit_csv(cert: ConnectionCertificate, n: int) -> str:
    """Float samples of the certified orbit at n points of s in [-1, 1]."""
    u = [seq_from_json(c) for c in cert.coefficients]
    s = np.linspace(-1.0, 1.0, n)
    t = cert.tau * (s + 1.0) / 2.0
    values = [c.eval(s) for c in u]
    return _csv(["s", "t", "x", "y", "z"], np.column_stack([s, t, *values]))


def manifold_boundary_csv(cert: ManifoldCertificate, n: int) -> str:
    """P(gamma(alpha)) on the unit circle of the chart, real part."""
    P = load_manifold(cert)
    alpha = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    if cert.side == "unstable":
        t1, t2 = np.exp(1j * alpha), np.exp(-1j * alpha)
    else:
        t1, t2 = np.cos(alpha), np.sin(alpha)
    values = [np.real(c.eval(t1, t2)) for c in P]
    return _csv(["alpha", "x", "y", "z"], np.column_stack([alpha, *values]))
