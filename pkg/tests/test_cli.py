import json
import struct
import subprocess
import sys

import numpy as np
import pytest

from dmot.cli import main
from dmot.persistence import decode, encode


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def pts(tmp_path):
    p = tmp_path / "pts.txt"
    np.savetxt(p, np.random.default_rng(0).random((40, 2)))
    return p


@pytest.fixture
def structure(tmp_path, pts, capsys):
    out = tmp_path / "s.dmot"
    assert run(capsys, "preprocess", pts, "-o", out)[0] == 0
    return out


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_preprocess_two_points(tmp_path, capsys):
    p = _write(tmp_path, "two.txt", "0 0\n3 4\n")
    code, out, _ = run(capsys, "preprocess", p, "-o", tmp_path / "t.dmot", "--format", "json")
    info = json.loads(out)
    assert code == 0 and info["schema"] == 1 and info["n"] == 2 and info["nodes"] == 3
    q = _write(tmp_path, "q.txt", "0 1\n")
    code, out, _ = run(capsys, "query", "steiner", tmp_path / "t.dmot", q, "--format", "json")
    res = json.loads(out)["results"][0]
    assert code == 0 and len(res["edges"]) == 1


def test_inadmissible_config_is_a_usage_error(tmp_path, pts, capsys):
    code, _, err = run(capsys, "preprocess", pts, "-o", tmp_path / "x.dmot", "--tau", "9", "--eta", "1")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "preprocess", pts, "-o", tmp_path / "x.dmot", "--epsilon", "0.5", "--tau", "2")
    assert code == 2


def test_queries_after_input_is_deleted(tmp_path, pts, structure, capsys):
    pts.unlink()
    q3 = _write(tmp_path, "q3.txt", "1 5 9\n")
    code, out, _ = run(capsys, "query", "tsp", structure, q3, "--format", "json")
    tour = json.loads(out)["results"][0]["tour"]
    assert code == 0 and sorted(tour) == [1, 5, 9]
    for kind, text in (
        ("steiner", "1 2 3 4\n"),
        ("forest", "1 2 3 4\n"),
        ("kcenter", "1 2 3 4 5\n"),
        ("fl-restricted", "1 2 3 ; 4 5\n"),
    ):
        q = _write(tmp_path, f"{kind}.txt", text)
        extra = ["--costs", _write(tmp_path, "c.txt", " ".join(["1"] * 40))] if kind == "fl-restricted" else []
        assert run(capsys, "query", kind, structure, q, *extra)[0] == 0
    sp = tmp_path / "sp.txt"
    assert run(capsys, "query", "steiner", structure, q3, "--dump-spanner", sp)[0] == 0
    assert sp.read_text().startswith("# query 0\n")


def test_unrestricted_fl(tmp_path, pts, capsys):
    costs = _write(tmp_path, "costs.txt", "\n".join(str(x) for x in np.linspace(0.1, 2, 40)))
    out = tmp_path / "fl.dmot"
    assert run(capsys, "preprocess", pts, "-o", out, "--fl-costs", costs)[0] == 0
    q = _write(tmp_path, "q.txt", "3 7 11\n")
    code, text, _ = run(capsys, "query", "fl-unrestricted", out, q, "--format", "json")
    assert code == 0 and set(json.loads(text)["results"][0]["assignment"]) == {"3", "7", "11"}


def test_bad_query_lines(tmp_path, structure, capsys):
    assert run(capsys, "query", "forest", structure, _write(tmp_path, "a.txt", "1 2 3\n"))[0] == 2
    assert run(capsys, "query", "steiner", structure, _write(tmp_path, "b.txt", "1 x\n"))[0] == 2
    assert run(capsys, "query", "steiner", structure, _write(tmp_path, "c.txt", "1 99\n"))[0] == 2
    assert run(capsys, "query", "fl-unrestricted", structure, _write(tmp_path, "d.txt", "1\n"))[0] == 2


def test_dynamic_scripts(tmp_path, pts, structure, capsys):
    code, out, _ = run(capsys, "dynamic", structure, _write(tmp_path, "e.txt", ""), "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["report"] == [] and doc["summary"]["final_k"] == 0
    code, out, _ = run(capsys, "dynamic", structure, _write(tmp_path, "p.txt", "ins 3\ndel 3\ncheck\n"), "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["final_k"] == 0 and doc["report"][-1]["tree_ok"]
    rng = np.random.default_rng(1)
    lines, cur = [], set()
    for _ in range(200):
        if cur and rng.random() < 0.4:
            x = int(rng.choice(sorted(cur)))
            cur.remove(x)
            lines.append(f"del {x}")
        else:
            x = int(rng.integers(40))
            if x not in cur:
                cur.add(x)
                lines.append(f"ins {x}")
    script = _write(tmp_path, "s.txt", "\n".join(lines))
    code, out, _ = run(capsys, "dynamic", structure, script, "--verify", pts, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["summary"]["passed"] and doc["summary"]["max_ratio"] <= doc["summary"]["bound"]
    assert run(capsys, "dynamic", structure, _write(tmp_path, "x.txt", "ins 3\nins 3\n"))[0] == 2
    assert run(capsys, "dynamic", structure, _write(tmp_path, "y.txt", "jump 3\n"))[0] == 2


def test_verify(tmp_path, pts, structure, capsys):
    code, out, _ = run(capsys, "verify", pts, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    sandwich = next(s for s in doc["suites"] if s["suite"] == "sandwich")
    assert sandwich["checked"] == 40 * 39 // 2 and "upper factor 6" in sandwich["note"]
    assert run(capsys, "verify", pts, "--structure", structure)[0] == 0
    # flipped byte
    data = bytearray(structure.read_bytes())
    data[len(data) // 2] ^= 1
    broken = tmp_path / "broken.dmot"
    broken.write_bytes(bytes(data))
    assert run(capsys, "verify", pts, "--structure", broken)[0] == 1
    # consistent file, wrong content: shift one meeting level
    st = decode(structure.read_bytes())
    st.tree.meetings = st.tree.meetings.copy()
    st.tree.meetings[0, 2] += 1
    lying = tmp_path / "lying.dmot"
    lying.write_bytes(encode(st)[0])
    code, out, _ = run(capsys, "verify", pts, "--structure", lying)
    assert code == 1 and "FAIL" in out


def test_bench_formats(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "64", "128", "--ks", "4", "8", "--trials", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1 and len(doc["rows"]) == 4
    assert set(doc["growth_n"]) == {"uniform2d/k=4", "uniform2d/k=8"}
    code, out, _ = run(capsys, "bench", "--families", "grid", "clustered2d", "--sizes", "64", "--trials", "1")
    assert code == 0 and "grid" in out and "clustered2d" in out


def test_console_script(tmp_path, pts):
    r = subprocess.run([sys.executable, "-m", "dmot.cli", "preprocess", str(pts), "-o", str(tmp_path / "m.dmot")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "nodes" in r.stdout
    r = subprocess.run([sys.executable, "-m", "dmot.cli", "bogus"], capture_output=True, text=True)
    assert r.returncode == 2
