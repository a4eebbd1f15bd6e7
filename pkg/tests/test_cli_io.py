import json
import math

import numpy as np
import pytest

from sparse_ortho import io as fmt
from sparse_ortho.bench import BENCH_COLUMNS, bench_generation
from sparse_ortho.cli import main
from sparse_ortho.conv import sample_conv
from sparse_ortho.givens import SparseOrthoMatrix, sample_rectangular


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# --- file formats ----------------------------------------------------------


def test_matrix_round_trip_bit_exact():
    a = sample_rectangular(7, 11, 0.4, rng=3)
    text = fmt.dumps_matrix(a)
    header = text.splitlines()[0]
    assert header == f"7 11 {a.nnz}"
    b = fmt.loads_matrix(text)
    assert b.values.tobytes() == np.asfortranarray(a.values).tobytes()
    np.testing.assert_array_equal(a.support, b.support)


def test_matrix_entries_sorted():
    a = sample_rectangular(6, 6, 0.5, rng=0)
    body = [tuple(map(int, ln.split()[:2])) for ln in fmt.dumps_matrix(a).splitlines()[1:]]
    assert body == sorted(body)


def test_matrix_format_17_digits():
    a = SparseOrthoMatrix.eye(2)
    a.values[0, 0] = 1 / 3
    assert "0.33333333333333331" in fmt.dumps_matrix(a)


def test_bad_matrix_files():
    with pytest.raises(ValueError):
        fmt.loads_matrix("")
    with pytest.raises(ValueError):
        fmt.loads_matrix("2 2 3\n0 0 1.0\n")


def test_kernel_round_trip():
    kern = sample_conv(5, 4, 1, 0.2, rng=1)
    weights, mask, k = fmt.loads_kernel(fmt.dumps_kernel(kern))
    assert k == 1
    np.testing.assert_array_equal(mask, kern.mask)
    assert weights.tobytes() == kern.weights.tobytes()
    assert fmt.dumps_kernel(kern).splitlines()[0] == f"5 4 1 {np.count_nonzero(kern.mask)}"


def test_csv_blank_for_none():
    text = fmt.rows_to_csv([{"a": 1, "b": None}], ["a", "b"])
    assert text == "a,b\n1,\n"


# --- CLI -------------------------------------------------------------------


def test_sample_twice_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(["sample", "--n", "4", "--density", "0.25", "--seed", "7", "--out", str(a)]) == 0
    assert main(["sample", "--n", "4", "--density", "0.25", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "4 4 4"


def test_sample_domain_error(capsys):
    code, out, err = run(["sample", "--density", "1.5"], capsys)
    assert code == 2 and out == "" and "density" in err


@pytest.mark.parametrize(
    "argv", [["frobnicate"], ["sample", "--bogus"], ["sample", "--n", "x", "--density", "0.2"], []]
)
def test_usage_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 1 and "usage" in err


def test_sample_json_and_rectangular(capsys):
    code, out, _ = run(["sample", "--n", "3", "--m", "6", "--density", "0.5", "--format", "json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["rows"] == 3 and doc["cols"] == 6
    w = np.zeros((3, 6))
    for i, j, v in doc["entries"]:
        w[i, j] = v
    np.testing.assert_allclose(w @ w.T, np.eye(3), atol=1e-12)


def test_sample_fixed_angle_and_scale(capsys):
    code, out, _ = run(["sample", "--n", "5", "--density", "0.6", "--angle", "0.0174533", "--sigma-w", "2"], capsys)
    assert code == 0
    a = fmt.loads_matrix(out)
    np.testing.assert_allclose(a.values @ a.values.T, 4 * np.eye(5), atol=1e-12)
    code, _, _ = run(["sample", "--n", "5", "--density", "0.6", "--angle", str(math.pi)], capsys)
    assert code == 2


def test_sample_conv(capsys):
    code, out, _ = run(["sample-conv", "--c-out", "4", "--c-in", "4", "--k", "1", "--density", "0.25"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "4 4 1 36"
    code, out, _ = run(["sample-conv", "--c-out", "4", "--c-in", "4", "--k", "1", "--density", "0.25",
                        "--center", "sqrt", "--format", "json"], capsys)
    assert code == 0 and len(json.loads(out)["mask"]) == 36
    code, _, err = run(["sample-conv", "--c-out", "4", "--c-in", "4", "--k", "1", "--density", "0.01",
                        "--center-density", "0.5"], capsys)
    assert code == 2 and "admissible" in err


def test_density_curve_columns(capsys):
    code, out, _ = run(["density-curve", "--n", "10", "--t-max", "20"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "t,expected_density,mc_mean,mc_stderr"
    assert len(lines) == 22 and lines[1] == "0,0.10000000000000001,,"
    code, out, _ = run(["density-curve", "--n", "10", "--t-max", "5", "--mc-trials", "3", "--seed", "2"], capsys)
    assert all(ln.count(",") == 3 and not ln.endswith(",") for ln in out.splitlines()[1:])


def test_allocate(tmp_path, capsys):
    arch = tmp_path / "arch.json"
    arch.write_text(json.dumps({"layers": [{"kind": "fc", "in": 10, "out": 100},
                                           {"kind": "fc", "in": 100, "out": 100}]}))
    code, out, _ = run(["allocate", "--arch", str(arch), "--density", "0.1"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "layer,kind,params,density"
    assert float(lines[1].split(",")[3]) == pytest.approx(0.11 * 1100 / 310, abs=1e-15)
    prof = tmp_path / "prof.json"
    code, out, _ = run(["allocate", "--arch", str(arch), "--density", "0.1", "--format", "json",
                        "--method", "uniform", "--out", str(prof)], capsys)
    assert json.loads(prof.read_text()) == {"d": 0.1, "densities": [0.1, 0.1]}
    code, out, _ = run(["allocate", "--arch", str(arch), "--density", "0.1", "--profile", str(prof)], capsys)
    assert json.loads(out)["ok"] is True
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    code, _, _ = run(["allocate", "--arch", str(arch), "--density", "0.1", "--profile", str(bad)], capsys)
    assert code == 2
    code, _, _ = run(["allocate", "--arch", str(tmp_path / "missing.json"), "--density", "0.1"], capsys)
    assert code == 2


def test_spectrum(capsys):
    argv = ["spectrum", "--depth", "2", "--width", "8", "--sparsities", "0,0.5", "--seeds", "0,1",
            "--inputs", "2", "--activations", "tanh,linear"]
    code, out, _ = run(argv, capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "scheme,allocator,activation,sparsity,seed,mean_sv,max_sv"
    assert len(lines) == 1 + 2 * 2 * 2 * 2 * 2
    assert run(argv, capsys)[1] == out


def test_bench_cli(capsys):
    code, out, _ = run(["bench", "--sizes", "8", "--densities", "0.25", "--schemes", "eoi,ai",
                        "--repeats", "2", "--ai-iters", "20"], capsys)
    lines = out.splitlines()
    assert code == 0 and lines[0] == ",".join(BENCH_COLUMNS) and len(lines) == 3


# --- bench -----------------------------------------------------------------


def test_bench_records():
    with pytest.warns(RuntimeWarning, match="sao"):
        recs = bench_generation([16], [1.0, 0.25], ["eoi", "sao"], repeats=2, seed=3)
    assert [(r.scheme, r.n, r.density) for r in recs] == [("eoi", 16, 1.0), ("eoi", 16, 0.25)]
    for r in recs:
        assert r.wall_time_s > 0 and r.ortho_score < 1e-10 and r.seed == 3


def test_bench_argument_checks():
    with pytest.raises(ValueError):
        bench_generation([], [0.1], ["eoi"])
    with pytest.raises(ValueError):
        bench_generation([8], [0.1], ["eoi"], repeats=0)
    with pytest.raises(ValueError):
        bench_generation([8], [0.1], ["svd"])
