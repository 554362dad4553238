import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st
from PIL import Image

from nwigner.cli import main
from nwigner.errors import BadDimension, ConfigError
from nwigner.io import (
    read_grid,
    read_operators,
    read_state,
    resolve_operators,
    resolve_state,
    write_grid,
    write_operators,
    write_state,
)
from nwigner.operators import (
    OperatorTuple,
    make_tuple,
    maximally_mixed,
    pauli_triple,
    random_hermitian,
    random_state,
)
from nwigner.render import colorize, render_heatmap
from nwigner.wigner import Axis, GridSpec, WignerGrid, compute_wigner, plan_grid


def pixels(path):
    return np.asarray(Image.open(path).convert("RGB"))


# file formats ------------------------------------------------------------

def test_operator_file_round_trip(tmp_path):
    tup = OperatorTuple((random_hermitian(3, 1), random_hermitian(3, 2)), ("A", "B"))
    write_operators(tmp_path / "ops.json", tup)
    back = read_operators(tmp_path / "ops.json")
    np.testing.assert_array_equal(back.matrices, tup.matrices)
    assert back.names == ("A", "B")


def test_state_files(tmp_path):
    st_ = random_state(3, 4)
    write_state(tmp_path / "s.json", st_)
    np.testing.assert_array_equal(read_state(tmp_path / "s.json").rho, st_.rho)
    (tmp_path / "pure.json").write_text(json.dumps({"type": "pure", "re": [1, 1], "im": [0, 0]}))
    np.testing.assert_allclose(read_state(tmp_path / "pure.json").rho, np.full((2, 2), 0.5))
    (tmp_path / "mm.json").write_text(json.dumps({"type": "maximally_mixed"}))
    np.testing.assert_allclose(read_state(tmp_path / "mm.json", dim=4).rho, np.eye(4) / 4)
    (tmp_path / "bad.json").write_text(json.dumps({"type": "mystery"}))
    with pytest.raises(ConfigError):
        read_state(tmp_path / "bad.json")
    with pytest.raises(ConfigError):
        read_state(tmp_path / "missing.json")


def test_presets():
    assert resolve_operators("pauli").n == 3
    np.testing.assert_array_equal(resolve_operators("pauli:zx").matrices, pauli_triple().select([2, 0]).matrices)
    assert resolve_operators("spin:3/2:zx").dim == 4
    assert resolve_operators("random:4:2:1").n == 2
    assert resolve_operators("pentagon").dim == 5
    with pytest.raises(ConfigError):
        resolve_operators("nothing-here.json")
    rho = resolve_state("spin:-1/2", 4).rho
    assert rho[2, 2] == 1
    with pytest.raises(ConfigError):
        resolve_state("basis:9", 3)
    with pytest.raises(ConfigError):
        resolve_state("no_such_preset", 3)


def test_state_dimension_mismatch(tmp_path):
    write_state(tmp_path / "s.json", random_state(2, 0))
    with pytest.raises(ConfigError):
        resolve_state(str(tmp_path / "s.json"), 3)


@given(st.integers(0, 1000), st.sampled_from([8, 16]), st.integers(1, 3))
@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
def test_grid_round_trip_bit_identical(tmp_path, seed, count, n):
    rng = np.random.default_rng(seed)
    spec = GridSpec(tuple(Axis(-1.0 - k, 1.5 + k, count) for k in range(n)), 0.01)
    values = rng.normal(size=spec.shape)
    grid = WignerGrid.from_values(spec, values)
    write_grid(tmp_path / f"g{seed}", grid)
    back, meta = read_grid(tmp_path / f"g{seed}.json")
    assert back.spec == grid.spec
    assert back.values.tobytes() == np.ascontiguousarray(values, dtype="<f8").tobytes()
    assert meta["dtype"] == "float64-le"


# rendering ---------------------------------------------------------------

def test_zero_grid_is_uniform_white(tmp_path):
    spec = GridSpec((Axis(-1, 1, 8), Axis(-1, 1, 8)), 0.1)
    meta = render_heatmap(WignerGrid.from_values(spec, np.zeros((8, 8))), tmp_path / "z.png")
    px = pixels(tmp_path / "z.png")
    assert np.all(px == px[0, 0])
    assert np.all(px[0, 0] >= 240)
    assert meta["vmin"] == 0 and meta["vmax"] == 0


def test_colour_scale_symmetric():
    rgb, vmax = colorize(np.array([-2.0, 0.0, 2.0, 1.0]))
    assert vmax == 2
    blue, white, red, _ = rgb.astype(int)
    assert blue[2] > blue[0] and red[0] > red[2]
    assert np.all(white >= 240)


def test_commuting_pair_renders_red_blobs(tmp_path):
    tup = make_tuple([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])])
    grid = compute_wigner(maximally_mixed(2), tup, plan_grid(tup, 0.01))
    render_heatmap(grid, tmp_path / "c.png")
    px = pixels(tmp_path / "c.png").astype(int)
    assert not np.any(px[..., 2] > px[..., 0] + 10)  # no blue anywhere
    ax, ay = grid.spec.axes
    for x, y in [(1, 3), (2, 4)]:
        col = int(round((x - ax.min) / ax.step))
        row = ay.count - 1 - int(round((y - ay.min) / ay.step))
        r, g, b = px[row, col]
        assert r > 100 and r > g + 50 and r > b + 50
    assert np.all(px[0, 0] >= 240)


def test_pauli_pair_renders_rings(tmp_path):
    tup = pauli_triple().select([0, 1])
    grid = compute_wigner(maximally_mixed(2), tup, plan_grid(tup, 0.01))
    render_heatmap(grid, tmp_path / "p.png")
    px = pixels(tmp_path / "p.png").astype(int)
    x, y = grid.spec.mesh()
    rad = np.hypot(x, y).T[::-1]
    outer = px[(rad > 0.98) & (rad < 1.12)].mean(axis=0)
    inner = px[(rad > 0.72) & (rad < 0.86)].mean(axis=0)
    far = px[rad > 1.5].mean(axis=0)
    assert outer[0] > outer[2] + 60
    assert inner[2] > inner[0] + 60
    assert np.all(far >= 240)


def test_render_needs_plane():
    spec = GridSpec((Axis(-1, 1, 8),) * 3, 0.1)
    grid = WignerGrid.from_values(spec, np.zeros((8, 8, 8)))
    with pytest.raises(BadDimension):
        render_heatmap(grid, "unused.png")


# command line ------------------------------------------------------------

def test_cli_compute_and_determinism(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        code = main(["compute", "--operators", "pauli:xy", "--state", "maximally_mixed", "--epsilon", "0.02",
                     "--format", "csv", "--out", str(tmp_path / name)])
        assert code == 0
        assert main(["render", "--grid", str(tmp_path / name / "grid.json")]) == 0
        outs.append(tmp_path / name)
    for f in ("grid.json", "grid.bin", "grid.csv"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    np.testing.assert_array_equal(pixels(outs[0] / "grid.png"), pixels(outs[1] / "grid.png"))
    meta = json.loads((outs[0] / "grid.json").read_text())
    prov = meta["provenance"]
    assert prov["tool"] == "nwigner" and "operators_sha256" in prov and prov["parameters"]["epsilon"] == 0.02


@pytest.mark.parametrize("cmd", [
    ["marginals", "--operators", "random:3:2:5", "--state", "random:1", "--directions", "5", "--seed", "2"],
    ["jnr", "--operators", "pauli:xy", "--state", "maximally_mixed", "--directions", "32"],
    ["kippenhahn", "--operators", "random:3:2:5", "--state", "maximally_mixed"],
    ["charfn", "--operators", "pauli:xy", "--state", "maximally_mixed", "--count", "9"],
    ["moments", "--operators", "random:3:2:5", "--state", "random:1", "--max-order", "2"],
    ["rank", "--operators", "pauli", "--state", "maximally_mixed", "--seed", "0"],
    ["covariance", "--operators", "pentagon", "--state", "random:2", "--unitary", "clock", "--seed", "0"],
    ["covariance", "--operators", "spin:4", "--state", "random:2", "--unitary", "exp:2:0.7", "--seed", "0"],
])
def test_cli_artifacts_deterministic(tmp_path, cmd):
    assert main([*cmd, "--out", str(tmp_path / "a")]) == 0
    assert main([*cmd, "--out", str(tmp_path / "b")]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_cli_outputs(tmp_path):
    assert main(["rank", "--operators", "pauli:xy", "--state", "maximally_mixed", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "rank.json").read_text())["rank"] == 3
    assert main(["covariance", "--operators", "pentagon", "--state", "random:3", "--unitary", "clock",
                 "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "covariance.json").read_text())["residual"] <= 1e-10
    header = (tmp_path / "kip").exists() or main(["kippenhahn", "--operators", "pauli:xy", "--state",
                                                  "maximally_mixed", "--out", str(tmp_path / "kip")])
    assert header == 0
    first = (tmp_path / "kip" / "kippenhahn.csv").read_text().splitlines()[0]
    assert first == "dir_1,dir_2,point_1,point_2,eigenvalue,gap"


def test_cli_reduce(tmp_path):
    write_operators(tmp_path / "ops.json", make_tuple(
        [np.kron(np.eye(2), pauli_triple().matrices[k]) for k in range(3)]))
    write_operators(tmp_path / "b.json", make_tuple([np.diag([0.0, 0, 1, 1])]))
    code = main(["reduce", "--operators", str(tmp_path / "ops.json"), "--state", "maximally_mixed",
                 "--reducer", str(tmp_path / "b.json"), "--out", str(tmp_path / "r")])
    assert code == 0
    data = json.loads((tmp_path / "r" / "reduce.json").read_text())
    assert [b["dim"] for b in data["blocks"]] == [2, 2]
    assert data["char_residual"] <= 1e-10


def test_cli_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"operators": "pauli:xy", "state": "maximally_mixed", "epsilon": 0.5}))
    assert main(["compute", "--config", str(cfg), "--epsilon", "0.05", "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "grid.json").read_text())["epsilon"] == 0.05


@pytest.mark.parametrize("args, code", [
    (["compute", "--operators", "missing.json", "--state", "maximally_mixed"], 2),
    (["compute", "--operators", "pauli:xy", "--state", "maximally_mixed", "--epsilon", "-1"], 2),
    (["compute", "--operators", "spin:3/2:zx", "--state", "spin:-1/2", "--epsilon", "0.001",
      "--resolution", "8"], 4),
    (["covariance", "--operators", "pauli:xy", "--state", "maximally_mixed", "--unitary", "exp:0:0.3"], 5),
    (["reduce", "--operators", "pauli", "--state", "maximally_mixed", "--reducer", "pauli:z"], 5),
])
def test_cli_exit_codes(tmp_path, args, code):
    assert main([*args, "--out", str(tmp_path / "o")]) == code


def test_cli_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["rank", "--operators", "pauli", "--state", "maximally_mixed", "--out", str(blocker / "sub")]) == 3
