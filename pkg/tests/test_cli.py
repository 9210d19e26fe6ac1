import numpy as np
import pytest

from qbilliard import cli, tables


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def probs(text):
    _, cols, rows = tables.parse_table(text)
    assert cols == ["k", "probability"]
    return np.array([float(r[1]) for r in rows])


def test_pctc_two_modes(capsys):
    code, out, _ = run(capsys, "pctc", "--M", "2", "--N", "2")
    assert code == 0
    assert out.splitlines()[-3:] == ["0,1.666666666667e-01", "1,6.666666666667e-01", "2,1.666666666667e-01"]


def test_dctc_ecp_three_modes(capsys):
    code, out, _ = run(capsys, "dctc", "--ecp", "--g", "0.5", "--M", "3", "--N", "3")
    assert code == 0
    assert np.allclose(probs(out), [0.125, 0.375, 0.375, 0.125], atol=1e-12)


def test_dctc_closed_forms(capsys):
    _, out, _ = run(capsys, "dctc", "--M", "2", "--g", "0.3")
    assert np.allclose(probs(out), [0.09, 0.42, 0.49])
    _, out, _ = run(capsys, "dctc", "--M", "2", "--coeffs", "0.1,0.2,0.3,0.4")
    assert np.allclose(probs(out), [0.1, 0.5, 0.4])
    code, _, err = run(capsys, "dctc", "--M", "2", "--coeffs", "0.5,0.5")
    assert code == 1 and "2**M" in err


def test_continuum_trivial(capsys):
    code, out, _ = run(capsys, "continuum", "--family", "dctc", "--q", "1.0")
    assert code == 0
    assert out.splitlines()[-2:] == ["k,probability", "0,1.000000000000e+00"]
    code, _, err = run(capsys, "continuum", "--family", "pctc_h")
    assert code == 1 and "--h" in err


def test_pctc_variants_agree_with_closed_form(capsys):
    for extra in (("--variant", "incomplete", "--h", "0.3"), ("--variant", "probabilistic", "--p", "0.37")):
        _, a, _ = run(capsys, "pctc", "--M", "2", *extra)
        _, b, _ = run(capsys, "pctc", "--M", "2", "--method", "closed", *extra)
        assert np.allclose(probs(a), probs(b), atol=1e-12)
    code, _, _ = run(capsys, "pctc", "--variant", "incomplete")
    assert code == 1


def test_byte_identical_output(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert cli.main(["dctc", "--ecp", "--M", "2", "--g", "0.3", "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    assert cli.main(["pctc", "--M", "2"]) == 0
    assert (tmp_path / "pctc.csv").exists()
    other = tmp_path / "sub"
    assert cli.main(["pctc", "--M", "2", "--output-dir", str(other)]) == 0
    assert (other / "pctc.csv").exists()


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# incomplete teleportation\nM = 3\nvariant = incomplete\nh = 0.25\n")
    _, out, _ = run(capsys, "pctc", "--config", str(cfg), "--M", "2")
    meta, _, rows = tables.parse_table(out)
    assert meta["M"] == "2" and meta["h"] == "0.25" and len(rows) == 3


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("M = 2\nbogus = 1\n", ":2: unknown option 'bogus'"),
        ("M = two\n", ":1: bad value for M"),
        ("\n\nvariant = sideways\n", ":3: variant must be one of"),
        ("M 2\n", ":1: expected 'key = value'"),
        ("quiet = maybe\n", ":1: quiet must be true or false"),
    ],
)
def test_config_errors_are_line_numbered(tmp_path, capsys, text, fragment):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _, err = run(capsys, "pctc", "--config", str(cfg))
    assert code == 1
    assert fragment in err


@pytest.mark.parametrize(
    "argv",
    [
        ["pctc", "--M", "2", "--N", "1"],
        ["pctc", "--M", "0"],
        ["pctc", "--dt", "-1"],
        ["pctc", "--M", "x"],
        ["nonsense"],
        ["pctc", "--config", "/nonexistent/file.cfg"],
    ],
)
def test_invalid_configuration_exits_one(capsys, argv):
    assert run(capsys, *argv)[0] == 1


def test_size_cap_exit_code(capsys):
    code, _, err = run(capsys, "dctc", "--ecp", "--M", "5")
    assert code == 2 and "cap" in err


def test_nonconvergence_exit_code(capsys):
    code, out, err = run(
        capsys, "dctc", "--ecp", "--M", "2", "--coherent", "--dt", "0.5", "--tol", "1e-300", "--max-iter", "50"
    )
    assert code == 4
    assert out == ""
    assert "did not converge" in err


def test_converge_rows_in_order(capsys):
    code, out, _ = run(capsys, "converge", "--family", "pctc_beta", "--r", "1.0", "--M-list", "8,16,32,64", "--jobs", "4")
    assert code == 0
    meta, cols, rows = tables.parse_table(out)
    assert cols == ["M", "sup_distance"]
    assert [r[0] for r in rows] == ["8", "16", "32", "64"]
    assert meta["monotone"] == "True"
    _, serial, _ = run(capsys, "converge", "--family", "pctc_beta", "--r", "1.0", "--M-list", "8,16,32,64")
    assert serial == out


def test_dispersion_check_exit_codes(capsys):
    code, out, _ = run(capsys, "dispersion-check", "--M", "2", "--p-values", "0.37", "--bundles", "cr")
    assert code == 0
    assert out.splitlines()[-1].endswith(",pass")
    code, out, err = run(capsys, "dispersion-check", "--M", "2", "--p-values", "0.37", "--prescriptions", "pctc")
    assert code == 3
    assert out.splitlines()[-1].endswith(",fail")
    assert "exceed" in err


def test_verify_subset(capsys):
    code, out, err = run(capsys, "verify", "--criteria", "1,4,11")
    assert code == 0
    assert err.count("[PASS]") == 3
    _, cols, rows = tables.parse_table(out)
    assert cols[:3] == ["criterion", "title", "passed"] and len(rows) == 3
    assert run(capsys, "verify", "--criteria", "99")[0] == 1
