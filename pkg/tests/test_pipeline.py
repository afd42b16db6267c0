"""
Tests for stage orchestration, certificate reuse, tuning and CSV exports.

The manifold and connection proofs are replaced by stand-in certificates so
these tests exercise the pipeline itself, not the numerics.
"""

import csv
import io

import pytest

from dependencies.config import get_settings
from dependencies.services import get_pipeline_service
from models import ProofReport
from services.connection_service import ConnectionService
from services.errors import MissingCertificateError, ProofFailure
from services.manifold_service import ManifoldService
from services.pipeline_service import CERTIFICATE_FILES, RESOLVED_CONFIG, TIMINGS_FILE, PipelineService
from services.pointproof_service import PointProofService
from tests.dependencies import fake_connection_certificate, fake_manifold_certificate


def read_csv(text: str) -> list[list[str]]:
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def pipeline(test_settings):
    return get_pipeline_service(test_settings)


@pytest.fixture
def stored_charts(storage):
    """Stand-in manifold certificates in manifolds.json."""
    certs = [fake_manifold_certificate("unstable", "c1"), fake_manifold_certificate("stable", "c0")]
    storage.save_json([c.model_dump(mode="json") for c in certs], CERTIFICATE_FILES["manifolds"])
    return certs


@pytest.fixture
def fake_manifold_proofs(mocker):
    """ManifoldService.validate and tune replaced by stand-ins."""
    mocker.patch.object(ManifoldService, "tune", return_value=0.3)
    return mocker.patch.object(
        ManifoldService,
        "validate",
        side_effect=lambda data: fake_manifold_certificate(data.side, data.equilibrium.name),
    )


@pytest.mark.services
class TestStageOrder:
    """Dependency checks and failure propagation."""

    def test_missing_upstream_certificates(self, pipeline):
        """The connection stage refuses to run without manifold certificates."""
        with pytest.raises(MissingCertificateError) as excinfo:
            pipeline.run(["connection"])
        assert excinfo.value.exit_code == 3
        record = pipeline.report.stage("connection")
        assert record.status == "failure"
        assert record.depends_on == ["equilibria", "manifolds"]
        assert pipeline.storage.exists(pipeline.config.output.report_name)

    def test_later_stages_skipped(self, pipeline, mocker):
        """A failing stage marks every later requested stage as skipped."""
        mocker.patch.object(pipeline, "run_eigen", side_effect=ProofFailure("eigenpair c1_lambda2 not certified"))
        with pytest.raises(ProofFailure):
            pipeline.run(["equilibria", "eigen", "manifolds", "connection"])
        statuses = {s.name: s.status for s in pipeline.report.stages}
        assert statuses == {"equilibria": "success", "eigen": "failure", "manifolds": "skipped", "connection": "skipped"}
        assert pipeline.report.stage("manifolds").message == "eigen failed"

    def test_stages_run_in_dependency_order(self, pipeline):
        """Requested stages are reordered to follow the dependency chain."""
        report = pipeline.run(["eigen", "equilibria"])
        assert [s.name for s in report.stages] == ["equilibria", "eigen"]
        assert len(report.eigenpairs) == 6

    def test_timings_kept_apart(self, pipeline):
        """Timings go to their own file, never into the report."""
        pipeline.run(["equilibria"])
        timings = pipeline.storage.load_json(TIMINGS_FILE)
        assert set(timings) == {"equilibria"}
        assert "timings" not in pipeline.storage.load_json(pipeline.config.output.report_name)


@pytest.mark.services
class TestCertificateReuse:
    """Certificates come from the report or from the stage files."""

    def test_report_reused_for_same_configuration(self, test_settings):
        """A second pipeline on the same configuration picks the report up."""
        get_pipeline_service(test_settings).run(["equilibria"])
        again = get_pipeline_service(test_settings)
        assert [c.name for c in again.report.equilibria] == ["c0", "c1"]

    def test_report_ignored_for_other_configuration(self, test_settings, test_settings_with_overrides):
        """Changing any setting starts a fresh report."""
        get_pipeline_service(test_settings).run(["equilibria"])
        other = get_pipeline_service(test_settings_with_overrides(newton={"tol": 1e-13}))
        assert other.report.equilibria == []

    def test_stage_files(self, pipeline, stored_charts):
        """Manifold certificates are read from manifolds.json."""
        unstable, stable = pipeline.chart_pair()
        assert unstable.name == "unstable_c1"
        assert stable.name == "stable_c0"

    def test_chart_pair_needs_both_sides(self, pipeline, storage):
        """Two stable charts are not a connection problem."""
        certs = [fake_manifold_certificate("stable", "c0"), fake_manifold_certificate("stable", "c1")]
        storage.save_json([c.model_dump(mode="json") for c in certs], CERTIFICATE_FILES["manifolds"])
        with pytest.raises(MissingCertificateError):
            pipeline.chart_pair()

    def test_reports_are_reproducible(self, test_settings, storage):
        """Equal configurations write byte-identical reports."""
        name = test_settings.output.report_name
        get_pipeline_service(test_settings).run(["equilibria", "eigen"])
        first = storage.path_for(name).read_text()
        for f in (name, CERTIFICATE_FILES["equilibria"], CERTIFICATE_FILES["eigen"]):
            storage.delete(f)
        get_pipeline_service(test_settings).run(["equilibria", "eigen"])
        assert storage.path_for(name).read_text() == first

    def test_report_schema_round_trip(self, pipeline, stored_charts):
        """serialize -> parse -> serialize is the identity."""
        pipeline.run(["equilibria", "eigen"])
        pipeline.report.manifolds = stored_charts
        pipeline.report.connection = fake_connection_certificate()
        text = pipeline.report.to_json()
        assert '"schema": 1' in text
        assert ProofReport.from_json(text).to_json() == text

    def test_manifold_stage_with_stand_ins(self, pipeline, fake_manifold_proofs):
        """Only equilibria with two eigenvalues on one side get a manifold."""
        pipeline.run(["equilibria", "eigen", "manifolds"])
        assert sorted(m.name for m in pipeline.report.manifolds) == ["stable_c0", "unstable_c1"]
        assert fake_manifold_proofs.call_count == 2


@pytest.mark.services
class TestTune:
    """Resolution of "auto" values."""

    def test_resolved_config_written(self, pipeline, fake_manifold_proofs, mocker):
        """tune fills every "auto" value and writes a loadable resolved.toml."""
        mocker.patch.object(ConnectionService, "tune", return_value={"alpha0": 1.25, "tau": 6.5, "K": 80})
        config = pipeline.tune()
        assert config.is_resolved
        assert config.manifold.scale_u == config.manifold.scale_s == 0.3
        assert pipeline.config is config

        reloaded = get_settings(pipeline.storage.path_for(RESOLVED_CONFIG))
        assert reloaded.is_resolved
        assert reloaded.orbit.alpha0 == 1.25
        assert reloaded.orbit.tau == 6.5
        assert reloaded.orbit.K == 80
        assert reloaded.snapshot() == config.snapshot()

    def test_explicit_scales_kept(self, test_settings_with_overrides, fake_manifold_proofs, mocker):
        """Scales given in the configuration are not re-tuned."""
        mocker.patch.object(ConnectionService, "tune", return_value={"alpha0": 1.25, "tau": 6.5, "K": 80})
        config = test_settings_with_overrides(manifold={"workers": 1, "scale_u": 0.25, "scale_s": 0.125})
        resolved = get_pipeline_service(config).tune()
        assert resolved.manifold.scale_u == 0.25
        assert resolved.manifold.scale_s == 0.125
        ManifoldService.tune.assert_not_called()

    def test_idempotent(self, pipeline, fake_manifold_proofs, mocker):
        """Tuning a resolved configuration changes nothing."""
        mocker.patch.object(ConnectionService, "tune", return_value={"alpha0": 1.25, "tau": 6.5, "K": 80})
        first = pipeline.tune()
        reloaded = get_settings(pipeline.storage.path_for(RESOLVED_CONFIG))
        second = get_pipeline_service(reloaded).tune()
        assert second.snapshot() == first.snapshot()
        assert ManifoldService.tune.call_count == 2


@pytest.mark.services
class TestExports:
    """CSV exports of the certified curves."""

    def test_orbit_csv(self, pipeline, storage):
        """Orbit samples u(s) = (s, s^2, 1) with t running over [0, tau]."""
        storage.save_json(fake_connection_certificate(tau=2.0).model_dump(mode="json"), CERTIFICATE_FILES["connection"])
        rows = read_csv(pipeline.export_trajectory("connection", n=5))
        assert rows[0] == ["s", "t", "x", "y", "z"]
        assert len(rows) == 6
        s, t, x, y, z = map(float, rows[1])
        assert (s, t) == (-1.0, 0.0)
        assert x == pytest.approx(-1.0)
        assert y == pytest.approx(1.0)
        assert z == pytest.approx(1.0)
        s, t, x, y, z = map(float, rows[3])
        assert t == pytest.approx(1.0)
        assert x == pytest.approx(0.0, abs=1e-15)
        assert float(rows[-1][1]) == 2.0

    def test_boundary_csv(self, pipeline, stored_charts):
        """Boundary curves by side or by manifold name."""
        for stage in ("stable", "unstable_c1"):
            rows = read_csv(pipeline.export_trajectory(stage, n=8))
            assert rows[0] == ["alpha", "x", "y", "z"]
            assert len(rows) == 9
            assert float(rows[1][0]) == 0.0

    def test_unknown_export(self, pipeline, stored_charts):
        """An unknown export source is a missing certificate."""
        with pytest.raises(MissingCertificateError):
            pipeline.export_trajectory("stable_c7")

    def test_missing_orbit(self, pipeline):
        """Exporting the orbit before the connection stage fails."""
        with pytest.raises(MissingCertificateError):
            pipeline.export_trajectory()


@pytest.mark.services
class TestServiceFactory:
    """Service construction from the configuration."""

    def test_out_dir_override(self, test_settings, tmp_path):
        """An explicit output directory wins over output.out_dir."""
        pipeline = get_pipeline_service(test_settings, out_dir=str(tmp_path / "elsewhere"))
        assert isinstance(pipeline, PipelineService)
        assert pipeline.storage.path_for("report.json") == tmp_path / "elsewhere" / "report.json"

    def test_stage_services_share_configuration(self, test_settings):
        """The pipeline builds its stage services through the factories."""
        pipeline = get_pipeline_service(test_settings)
        assert isinstance(pipeline.points, PointProofService)
        assert isinstance(pipeline.manifold, ManifoldService)
        assert isinstance(pipeline.connection, ConnectionService)
        assert pipeline.points.config is pipeline.manifold.config is pipeline.connection.config is test_settings
