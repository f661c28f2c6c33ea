import re

import numpy as np
import pytest

from polyproj import StudyRow, fit_rates, run_convergence, run_grad_error, run_patch_test
from polyproj.cli import main as cli_main
from polyproj.quadrature import QUADRANGULATION


def rows_from(hs, eps):
    return [StudyRow(level=i + 1, h=h, eps0=e, eps1=e) for i, (h, e) in enumerate(zip(hs, eps))]


class TestFitRates:
    def test_linear_decay(self):
        hs = [0.8, 0.4, 0.2, 0.1]
        r0, r1 = fit_rates(rows_from(hs, hs))
        assert r0 == pytest.approx(1.0, abs=1e-12)
        assert r1 == pytest.approx(1.0, abs=1e-12)

    def test_quadratic_with_constant(self):
        hs = [0.8, 0.4, 0.2, 0.1]
        r0, _ = fit_rates(rows_from(hs, [4.0 * h**2 for h in hs]))
        assert r0 == pytest.approx(2.0, abs=1e-12)

    def test_plateau(self):
        hs = [0.8, 0.4, 0.2]
        r0, r1 = fit_rates(rows_from(hs, [1e-3] * 3))
        assert abs(r0) < 1e-12 and abs(r1) < 1e-12

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            fit_rates(rows_from([0.5], [0.1]))

    def test_uses_last_three_rows_only(self):
        hs = [0.8, 0.4, 0.2, 0.1]
        eps = [100.0, 0.4, 0.2, 0.1]  # outlier at the coarsest level
        r0, _ = fit_rates(rows_from(hs, eps))
        assert r0 == pytest.approx(1.0, abs=1e-12)


class TestStudies:
    def test_linear_patch_projected(self):
        report = run_patch_test(1, "projected", QUADRANGULATION, 1, levels=(1, 2))
        assert all(r.eps1 <= 1e-11 for r in report.rows)
        assert report.config["problem"] == "patch-linear"

    def test_raw_quadrature_plateau_flag(self):
        report = run_patch_test(1, "quadrature", QUADRANGULATION, 2, levels=(2, 3))
        assert report.rows[-1].eps1 > 1e-4  # does not vanish

    def test_raw_quadrature_stalls_on_smooth_problem(self):
        # with a fixed low-order rule the energy error flattens once the
        # consistency floor is reached; for quadratic elements that happens
        # within the first few levels
        report = run_convergence("smooth1", 2, "quadrature", QUADRANGULATION, 2,
                                 levels=(1, 2, 3, 4))
        assert report.rate_h1 < 1.0
        assert report.rows[-1].eps1 / report.rows[-2].eps1 > 0.7

    def test_h_strictly_decreasing(self):
        report = run_convergence("smooth1", 1, "projected", QUADRANGULATION, 1, levels=(1, 2, 3))
        hs = [r.h for r in report.rows]
        assert all(b < a for a, b in zip(hs, hs[1:]))

    def test_unknown_problem(self):
        with pytest.raises(ValueError):
            run_convergence("mystery", 1, "projected", QUADRANGULATION, 1, levels=(1, 2))

    def test_grad_error_table(self):
        table = run_grad_error("hex", orders=(1, 2, 4))
        assert table.values.shape == (2, 3)
        assert (np.diff(table.values, axis=1) < 0).all()

    def test_grad_error_unknown_polygon(self):
        with pytest.raises(ValueError):
            run_grad_error("megagon")


class TestCsvContract:
    def test_study_csv_reruns_byte_identical(self):
        a = run_patch_test(1, "projected", QUADRANGULATION, 1, levels=(1, 2)).csv()
        b = run_patch_test(1, "projected", QUADRANGULATION, 1, levels=(1, 2)).csv()
        assert a == b

    def test_study_csv_format(self):
        csv = run_patch_test(1, "projected", QUADRANGULATION, 1, levels=(1, 2)).csv()
        lines = csv.splitlines()
        assert lines[0] == "level,h,eps0,eps1"
        # 16 significant digits in scientific notation
        assert re.fullmatch(r"1,\d\.\d{15}e[-+]\d{2},.*", lines[1])

    def test_grad_error_csv(self):
        table = run_grad_error("square", orders=(1, 2))
        lines = table.csv().splitlines()
        assert lines[0] == "scheme,order_1,order_2"
        assert lines[1].startswith("triangulation,")
        assert lines[2].startswith("quadrangulation,")

    def test_grad_error_csv_reruns_byte_identical(self):
        a = run_grad_error("hex", orders=(1, 4)).csv()
        b = run_grad_error("hex", orders=(1, 4)).csv()
        assert a == b


class TestCli:
    def test_grad_error_to_file(self, tmp_path):
        out = tmp_path / "table.csv"
        code = cli_main(["grad-error", "--polygon", "square", "--orders", "1,2",
                        "--out", str(out)])
        assert code == 0
        assert out.read_text().startswith("scheme,order_1,order_2")

    def test_patch_test_run(self, tmp_path):
        out = tmp_path / "patch.csv"
        code = cli_main(["patch-test", "--m", "1", "--mode", "projected",
                        "--scheme", "quad", "--order", "1", "--levels", "1..2",
                        "--out", str(out)])
        assert code == 0
        assert out.read_text().splitlines()[0] == "level,h,eps0,eps1"

    def test_converge_levels_comma_list(self, tmp_path):
        out = tmp_path / "conv.csv"
        code = cli_main(["converge", "--problem", "smooth1", "--m", "1", "--mode",
                        "projected", "--levels", "1,2", "--out", str(out)])
        assert code == 0
        assert len(out.read_text().splitlines()) == 5  # header + 2 rows + 2 comments

    def test_polygon_file_input(self, tmp_path):
        poly = tmp_path / "poly.txt"
        poly.write_text("0 0\n2 0\n2 1\n0 1\n")
        out = tmp_path / "t.csv"
        assert cli_main(["grad-error", "--polygon", str(poly), "--orders", "1",
                        "--out", str(out)]) == 0

    def test_validation_error_exit_code(self, tmp_path, capsys):
        code = cli_main(["grad-error", "--polygon", "nonexistent-registry-name",
                        "--out", str(tmp_path / "x.csv")])
        assert code == 2
        assert "polyproj:" in capsys.readouterr().err

    def test_bad_scheme_rejected_by_parser(self):
        with pytest.raises(SystemExit) as info:
            cli_main(["patch-test", "--m", "1", "--mode", "projected",
                      "--scheme", "hexes", "--order", "1", "--out", "-"])
        assert info.value.code == 2

    def test_solver_failure_exit_code(self, monkeypatch, tmp_path, capsys):
        from polyproj import cli
        from polyproj.errors import SolverDiverged

        def boom(*args, **kwargs):
            raise SolverDiverged("stalled")

        monkeypatch.setattr(cli, "run_patch_test", boom)
        code = cli_main(["patch-test", "--m", "1", "--mode", "projected",
                        "--out", str(tmp_path / "x.csv")])
        assert code == 3
        assert "solver failure" in capsys.readouterr().err

    def test_stdout_output(self, capsys):
        assert cli_main(["grad-error", "--polygon", "square", "--orders", "1",
                        "--out", "-"]) == 0
        assert capsys.readouterr().out.startswith("scheme,order_1")
