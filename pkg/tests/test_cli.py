import json
import re
import shlex
import subprocess
import sys
import time
from pathlib import Path

import pytest

from xperiods.cli import main

ROOT = Path(__file__).resolve().parent.parent


def readme_examples():
    text = (ROOT / "README.md").read_text()
    out = []
    for block in re.findall(r"```sh\n(.*?)```", text, flags=re.S):
        for line in block.splitlines():
            if not line.startswith("xp "):
                continue
            cmd, _, note = line.partition("#")
            m = re.search(r"exit (\d+)", note)
            out.append((cmd.strip(), int(m.group(1)) if m else 0))
    return out


EXAMPLES = readme_examples()


def test_readme_has_examples():
    assert len(EXAMPLES) >= 10


@pytest.mark.parametrize("cmd,code", EXAMPLES, ids=[c for c, _ in EXAMPLES])
def test_readme_example(cmd, code):
    argv = [sys.executable, "-m", "xperiods.cli"] + shlex.split(cmd)[1:]
    t0 = time.perf_counter()
    res = subprocess.run(argv, cwd=ROOT, capture_output=True, text=True, timeout=60)
    assert time.perf_counter() - t0 < 10
    assert res.returncode == code, res.stdout + res.stderr
    if "--csv" in cmd:
        assert res.stdout.startswith("key,value\nschema,xp/1\n")
    else:
        env = json.loads(res.stdout)
        assert env["schema"] == "xp/1"
        assert env["status"] == {0: "ok", 2: "rejected", 3: "error", 64: "error"}[code]


def call(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if not out.startswith("key,") else out)


def test_period_eval_payload(capsys):
    code, env = call(capsys, "period", "eval", "--f", "z", "--omega", "dz", "--path", "ray:0:1")
    assert code == 0
    assert abs(env["payload"]["re"] - 1) <= 1e-10 and env["payload"]["abs_err"] <= 1e-10


def test_forced_value(capsys):
    code, env = call(capsys, "period", "eval", "--f", "1/z", "--omega", "dz/z^2",
                     "--path", "ray:1:1", "--force")
    assert code == 2 and env["status"] == "rejected"
    assert abs(env["payload"]["re"] - 0.6321205588285577) < 1e-8


def test_homology_and_derham_agree(capsys):
    _, rd = call(capsys, "homology", "rd", "--f", "z^4", "--marked", "0")
    _, dr = call(capsys, "derham", "--f", "z^4", "--marked", "0")
    assert rd["payload"]["rank"] == dr["payload"]["rank"] == 4


def test_chain_json(capsys):
    cx = {"dims": [1, 1], "d": [[[0]]]}
    code, env = call(capsys, "homology", "chain", "--in", json.dumps(cx))
    assert code == 0 and env["payload"]["ranks"] == [1, 1]


def test_volume_half_disk(capsys):
    code, env = call(capsys, "volume", "represent", "--domain", str(ROOT / "data/half_disk.json"),
                     "--density", "1")
    assert code == 0 and abs(env["payload"]["value"] - 1.5707963) < 1e-6


def test_combine(capsys):
    code, env = call(capsys, "volume", "combine", "--spec", str(ROOT / "data/combine.json"))
    assert code == 0 and env["payload"]["volume"] == 0.75


def test_seed_position_and_determinism(capsys):
    _, a = call(capsys, "--seed", "3", "check", "stokes", "--random", "4")
    _, b = call(capsys, "check", "stokes", "--random", "4", "--seed", "3")
    _, c = call(capsys, "check", "stokes", "--random", "4", "--seed", "4")
    assert a == b and a != c


def test_csv_flag(capsys):
    code, out = call(capsys, "--csv", "homology", "rd", "--f", "z^2", "--marked", "0")
    assert code == 0 and "payload.rank,2" in out.splitlines()


@pytest.mark.parametrize("argv", [
    ["frobnicate"],
    ["period", "eval", "--f", "z"],
    ["period", "eval", "--f", "z(", "--omega", "dz", "--path", "ray:0:1"],
    ["homology", "chain", "--in", "no_such_file.json"],
])
def test_usage_errors(capsys, argv):
    code, env = call(capsys, *argv)
    assert code == 64 and env["status"] == "error" and env["payload"] is None


def test_numerical_failure_exit(capsys):
    code, env = call(capsys, "period", "eval", "--f", "z", "--omega", "dz", "--path", "ray:0:i", "--force")
    assert code == 3 and env["diagnostics"][0].startswith("QuadratureFailure")
