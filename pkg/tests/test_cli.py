"""Exit-code contract and subcommand behavior, exercised in process."""

import pytest

from fvcert.cli import main
from fvcert.prover import parse_certificate, serialize_certificate


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "isothermal-euler" in out
    assert "minmod" in out


class TestProve:
    def test_proved_goal_exits_zero(self, capsys):
        assert main(["prove", "--limiter", "minmod",
                     "--property", "tvd"]) == 0
        assert "verdict: Proved" in capsys.readouterr().out

    def test_unproved_goal_exits_two(self, capsys):
        assert main(["prove", "--system", "isothermal-euler-dens-mom",
                     "--property", "lipschitz"]) == 2
        out = capsys.readouterr().out
        assert "verdict: NotProved" in out
        assert "obligation:" in out

    def test_assumption_discharges(self, capsys):
        assert main(["prove", "--system", "isothermal-euler",
                     "--property", "lipschitz",
                     "--assume", "positive:rho"]) == 0
        assert "ProvedConditional" in capsys.readouterr().out

    def test_usage_errors_exit_one(self, capsys):
        assert main(["prove", "--property", "tvd"]) == 1
        assert main(["prove", "--system", "linear-advection",
                     "--limiter", "minmod", "--property", "cfl"]) == 1
        assert main(["prove", "--system", "linear-advection",
                     "--property", "tvd"]) == 1
        assert main(["prove", "--limiter", "minmod",
                     "--property", "nonsense"]) == 1
        err = capsys.readouterr().err
        assert "fvcert:" in err

    def test_unknown_system_exits_one(self, capsys):
        assert main(["prove", "--system", "nope", "--property", "cfl"]) == 1
        assert "fvcert:" in capsys.readouterr().err


class TestCheck:
    @pytest.fixture
    def cert_file(self, tmp_path, capsys):
        path = tmp_path / "goal.cert"
        assert main(["prove", "--limiter", "minmod", "--property", "symmetry",
                     "--out", str(path)]) == 0
        capsys.readouterr()
        return path

    def test_fresh_certificate_accepted(self, cert_file, capsys):
        assert main(["check", str(cert_file)]) == 0
        assert "certificate ok" in capsys.readouterr().out

    def test_tampered_certificate_rejected(self, cert_file, tmp_path, capsys):
        cert = parse_certificate(cert_file.read_text())
        steps = list(cert.steps)
        victim = next(i for i, s in enumerate(steps)
                      if type(s).__name__ == "RewriteStep")
        steps[victim] = type(steps[victim])(
            steps[victim].rule, steps[victim].path,
            steps[victim].before, ("*", 2.0, steps[victim].after))
        import dataclasses
        bad = dataclasses.replace(cert, steps=tuple(steps))
        bad_path = tmp_path / "bad.cert"
        bad_path.write_text(serialize_certificate(bad))
        assert main(["check", str(bad_path)]) == 1
        err = capsys.readouterr().err
        assert f"step {victim + 1}" in err

    def test_missing_file(self, capsys):
        assert main(["check", "/nonexistent/x.cert"]) == 1
        assert "fvcert: io:" in capsys.readouterr().err

    def test_garbage_file(self, tmp_path, capsys):
        path = tmp_path / "junk.cert"
        path.write_text("junk\n")
        assert main(["check", str(path)]) == 1
        assert "fvcert: certificate:" in capsys.readouterr().err


class TestCodegen:
    def test_writes_solver_pair(self, tmp_path, capsys):
        out = tmp_path / "gen"
        assert main(["codegen", "--system", "linear-advection",
                     "--scheme", "lax", "--order", "2",
                     "--limiter", "mc", "--out", str(out)]) == 0
        assert (out / "solver.c").exists()
        assert (out / "system.h").exists()

    def test_order2_needs_limiter(self, capsys):
        assert main(["codegen", "--system", "linear-advection",
                     "--order", "2", "--out", "/tmp/never"]) == 1


class TestSimulate:
    def test_dump_written(self, tmp_path, capsys):
        dump = tmp_path / "state.csv"
        assert main(["simulate", "--system", "inviscid-burgers",
                     "--cells", "32", "--t-end", "0.1",
                     "--dump", str(dump)]) == 0
        lines = dump.read_text().splitlines()
        assert lines[0].startswith("# system=inviscid-burgers cells=32")
        assert len(lines) == 33


class TestStudy:
    def test_convergence_prints_slope(self, capsys):
        assert main(["study", "--kind", "convergence"]) == 0
        out = capsys.readouterr().out
        assert "slope=" in out

    def test_tv_monotone(self, capsys):
        assert main(["study", "--kind", "tv", "--scheme", "roe",
                     "--order", "2", "--limiter", "minmod"]) == 0
        assert "tv-monotone: yes" in capsys.readouterr().out
