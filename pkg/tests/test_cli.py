import csv
import json
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from ssdc.cli import main
from ssdc.config import RunConfig, SweepSpec, load_robustness, load_run, load_sweep
from ssdc.driver import (TIMESERIES_COLUMNS, fit_order, read_field_dump, run, sweep)
from ssdc.sbp import ConfigurationError


def write_ini(path, body):
    path.write_text(textwrap.dedent(body))
    return str(path)


@pytest.fixture
def freestream_ini(tmp_path):
    return write_ini(tmp_path / "fs.ini", f"""
        [run]
        case = freestream
        scheme = es-c
        p = 3
        elements = 2
        atol = 1e-12
        rtol = 1e-12
        t_final = 0.05
        output = {tmp_path / 'fs'}
        dump_every = 2
        """)


def test_run_freestream_outputs(freestream_ini, tmp_path, capsys):
    assert main(["run", "--config", freestream_ini]) == 0
    out = tmp_path / "fs"
    s = json.loads((out / "summary.json").read_text())
    assert s["status"] == "finished" and s["exit_code"] == 0
    assert s["max_deviation"] <= 1e-10
    assert "wall_clock" not in (out / "summary.json").read_text()
    assert "wall_clock" in json.loads((out / "timing.json").read_text())
    with open(out / "timeseries.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TIMESERIES_COLUMNS
    assert len(rows) == s["n_steps"] + 2          # header, initial row, one per step
    assert all(len(v) > 15 for v in rows[-1][1:3])  # 17 significant digits
    meta, data = read_field_dump(out / "field_final.bin")
    assert meta["p"] == "3" and data.shape == (5, 2, 2, 2, 4, 4, 4)
    meta, xyz = read_field_dump(out / "grid.bin")
    assert meta["fields"] == "x1 x2 x3"
    assert "finished" in capsys.readouterr().out


def test_periodic_field_dumps(tmp_path):
    cfg = RunConfig(case="vortex", p=1, elements=(2, 2, 2), t_final=0.2, dump_every=2,
                    output=str(tmp_path / "d"))
    res = run(cfg)
    n = res.summary["n_steps"]
    assert n >= 2
    assert res.summary["dumps"] == [f"field_{k:08d}.bin" for k in range(2, n + 1, 2)] + ["field_final.bin"]
    meta, data = read_field_dump(tmp_path / "d" / "field_00000002.bin")
    assert 0 < float(meta["t"]) < 0.2
    np.testing.assert_array_equal(read_field_dump(tmp_path / "d" / "field_final.bin")[1], res.q)


def test_summary_is_byte_identical(freestream_ini, tmp_path):
    main(["run", "--config", freestream_ini])
    first = (tmp_path / "fs" / "summary.json").read_bytes()
    main(["run", "--config", freestream_ini])
    assert (tmp_path / "fs" / "summary.json").read_bytes() == first


def test_blowup_exit_code(tmp_path):
    # a near-vacuum vortex core on a very coarse grid loses positivity at once
    ini = write_ini(tmp_path / "b.ini", f"""
        [run]
        case = vortex
        scheme = dc
        p = 1
        elements = 3
        output = {tmp_path / 'b'}
        [case]
        beta = 16.95
        """)
    assert main(["run", "--config", ini]) == 10
    s = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert s["status"] == "blowup" and s["blowup"]["time"] < s["t_final"]
    assert "errors" not in s


def test_step_limit_exit_code(tmp_path):
    ini = write_ini(tmp_path / "m.ini", f"""
        [run]
        case = vortex
        p = 1
        elements = 2
        max_steps = 3
        output = {tmp_path / 'm'}
        """)
    assert main(["run", "--config", ini]) == 3


@pytest.mark.parametrize("body", [
    "[run]\ncase = nope\n",
    "[run]\ncase = vortex\nviscous = true\n",
    "[run]\nscheme = roe\n",
    "[run]\np = 0\n",
    "[run]\nelements = 2 2\n",
    "[run]\nbogus = 1\n",
    "[run]\ncase = tgv\n[case]\nreynold = 3\n",
    "[other]\n",
])
def test_config_errors_exit_2(tmp_path, body, capsys):
    ini = write_ini(tmp_path / "bad.ini", body)
    assert main(["run", "--config", ini]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.ini")]) == 2


def test_degenerate_sweep_is_config_error(tmp_path):
    ini = write_ini(tmp_path / "s.ini", """
        [run]
        case = vortex
        [sweep]
        grids = 1: 2; 3: 1 2
        """)
    with pytest.raises(ConfigurationError):
        load_sweep(ini)
    assert main(["sweep", "--config", ini]) == 2


def test_config_parsing(tmp_path):
    ini = write_ini(tmp_path / "c.ini", """
        [run]
        case = chit
        scheme = SF-KG
        p = 2
        elements = 4 4 2   ; per direction
        viscous = auto
        c_ip = auto
        t_final = auto
        seed = 3
        [case]
        mach_t = 0.3
        [robustness]
        schemes = es-c, dc
        p_list = 1, 2
        elements = 4
        seeds = 0, 1, 2
        budget = 60
        """)
    cfg = load_run(ini)
    assert cfg.scheme == "sf-kg" and cfg.elements == (4, 4, 2) and cfg.use_viscous
    assert cfg.c_ip is None and cfg.t_final is None and cfg.case_params == (("mach_t", 0.3),)
    spec = load_robustness(ini)
    assert spec.schemes == ("es-c", "dc") and spec.seeds == (0, 1, 2) and spec.budget == 60
    with pytest.raises(ConfigurationError):
        load_robustness(write_ini(tmp_path / "r.ini", "[run]\ncase = vortex\n"))


def test_sweep_spec_validation():
    with pytest.raises(ConfigurationError):
        SweepSpec(RunConfig(), ((1, 2), (1, 2)))
    assert SweepSpec(RunConfig(), ((1, 2), (1, 4), (3, 1), (3, 2))).degrees == [1, 3]


def test_fit_order():
    h = np.array([1, 0.5, 0.25])
    assert fit_order(h, 3 * h**4) == pytest.approx(4.0)
    assert np.isnan(fit_order(h, [np.nan, np.nan, 1.0]))


def test_sweep_writes_table(tmp_path):
    spec = SweepSpec(RunConfig(case="vortex", p=1, t_final=0.05, output=str(tmp_path / "sw")),
                     ((1, 2), (1, 3)), expect_order=False)
    rows, orders, code = sweep(spec)
    assert code == 0 and len(rows) == 2 and np.isfinite(orders[1])
    table = list(csv.DictReader(open(tmp_path / "sw" / "convergence.csv")))
    assert [int(r["K"]) for r in table] == [2, 3] and all(r["status"] == "finished" for r in table)
    assert json.loads((tmp_path / "sw" / "orders.json").read_text())["exit_code"] == 0


def test_robustness_budget_skips(tmp_path):
    ini = write_ini(tmp_path / "rb.ini", f"""
        [run]
        case = tgv
        t_final = 0.01
        atol = 1e-6
        rtol = 1e-6
        output = {tmp_path / 'rb'}
        [robustness]
        schemes = es-c, dc
        p_list = 1
        elements = 2
        budget = 1e-9
        """)
    assert main(["robustness", "--config", ini]) == 1      # second cell skipped
    text = (tmp_path / "rb" / "robustness.txt").read_text()
    assert "es-c" in text and "-" in text


def test_module_entry_point(freestream_ini):
    r = subprocess.run([sys.executable, "-m", "ssdc", "run", "--config", freestream_ini],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
