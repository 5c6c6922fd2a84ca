"""End-to-end tests chaining CLI commands through files."""

import json
from pathlib import Path

import numpy as np
import pytest

from deleverage.cli import main
from deleverage.models import MarketModel
from deleverage.models.schema import EstimateDocument, SolutionDocument


class TestGenerateThenSolve:
    """Tests for solving freshly generated instances."""

    def test_solve_generated(self, tmp_path: Path) -> None:
        """Test that a generated instance solves to certified optimality."""
        out_dir = tmp_path / "instances"
        assert main(["generate", "--m", "3", "--seed", "4", "--out-dir", str(out_dir)]) == 0
        instance = out_dir / "inst_4_0.json"
        solution = tmp_path / "solution.json"
        code = main(
            ["solve", str(instance), "--time-limit", "60", "--diagnose", "--out", str(solution)]
        )
        assert code == 0
        doc = SolutionDocument.model_validate_json(solution.read_text())
        assert doc.status == "eps-optimal"
        assert doc.global_bound_gap <= doc.eps
        assert doc.diagnostics is not None
        assert doc.diagnostics["certified"] is True

    def test_sweep_generated(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test that equity does not fall as the bound loosens."""
        assert main(["generate", "--m", "3", "--seed", "8", "--out-dir", str(tmp_path)]) == 0
        capsys.readouterr()
        code = main(
            ["sweep", str(tmp_path / "inst_8_0.json"), "--rhos", "18", "20", "--time-limit", "60"]
        )
        assert code == 0
        rows = [json.loads(line) for line in capsys.readouterr().out.strip().splitlines()]
        assert rows[0]["equity"] <= rows[1]["equity"] + 1e-5


class TestSimulateThenEstimate:
    """Tests for recovering impact matrices from simulated trades."""

    def test_noiseless_recovery(
        self, data_dir: Path, example1: MarketModel, tmp_path: Path
    ) -> None:
        """Test that estimating simulated Example 1 trades returns its matrices."""
        trades = tmp_path / "trades.csv"
        estimate = tmp_path / "estimate.json"
        panel = tmp_path / "panel.csv"
        assert main(["simulate", str(data_dir / "example1.json"), "--out", str(trades)]) == 0
        code = main(
            [
                "estimate",
                str(trades),
                "--scale",
                "1",
                "--out",
                str(estimate),
                "--panel-out",
                str(panel),
            ]
        )
        assert code == 0
        doc = EstimateDocument.model_validate_json(estimate.read_text())
        assert doc.rows == 18 * 120
        np.testing.assert_allclose(doc.lambda_, example1.temp_impact, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(doc.gamma, example1.perm_impact, rtol=1e-6, atol=1e-9)
        assert panel.exists()

    def test_estimate_missing_column(self, tmp_path: Path) -> None:
        """Test that a trades file without prices is invalid input."""
        trades = tmp_path / "trades.csv"
        trades.write_text("timestamp_s,asset,signed_volume\n0.0,0,1.0\n")
        assert main(["estimate", str(trades)]) == 1
