"""End-to-end checks of the polymag command line: exit codes, output schema, CSV shape."""

import csv
import io
import json
import math
import os
import subprocess
import sys
import tempfile

import jsonschema

CLI, SCHEMA, DATA = sys.argv[1], sys.argv[2], sys.argv[3]

with open(SCHEMA) as f:
    VALIDATOR = jsonschema.Draft202012Validator(json.load(f))

failures = []


def run(*args, env=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=env, timeout=600)


def record(*args, code=0, env=None):
    p = run(*args, env=env)
    check(p.returncode == code, f"{args}: exit {p.returncode}, wanted {code}; stderr: {p.stderr.strip()}")
    if p.returncode != 0:
        return None
    rec = json.loads(p.stdout)
    errors = [e.message for e in VALIDATOR.iter_errors(rec)]
    check(not errors, f"{args}: schema violations {errors[:3]}")
    return rec


def check(ok, message):
    if not ok:
        failures.append(message)


def data(name):
    return os.path.join(DATA, name)


# moments
rec = record("moment", "--builtin", "bm-drift", "--param", "a=t", "--k", "1", "--x", "0")
check(abs(rec["result"]["value"] - 0.5) <= 1e-12, "bm-drift a=t mean")

rec = record("moment", "--builtin", "ou-theta-t", "--k", "3", "--x", "0.7", "--s", "0.4", "--t", "0.4")
check(abs(rec["result"]["value"] - 0.7**3) <= 1e-14, "moment at t = s is x^k")

rec = record("moment", "--spec", data("ou.spec"), "--k", "2", "--x", "0.5")
check(math.isfinite(rec["result"]["value"]), "spec file moment")

rec = record("moment", "--builtin", "affine-square", "--k", "1,1")
check(math.isfinite(rec["result"]["value"]), "two-dimensional moment")

for args in (("--builtin", "quadratic-drift-counterexample"), ("--spec", data("quadratic.spec"))):
    p = run("moment", *args, "--k", "2")
    check(p.returncode == 3 and "DegreeOverflow" in p.stderr, f"{args}: degree overflow, got {p.returncode}")

# matrices
rec = record("matrix", "--builtin", "ou-theta-t", "--k", "2")
check(rec["result"]["matrix"] == [[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [0.0, 0.0, -2.0]], "OU generator at t = 0")

rec = record("transition", "--builtin", "ou-theta-t", "--k", "2")
check(all(abs(v) < 1e-15 for v in (rec["result"]["matrix"][1][0], rec["result"]["matrix"][2][0])), "transition column 0")

rec = record("magnus", "--builtin", "bm-drift")
for term in ("omega2", "omega3"):
    check(all(v == 0.0 for row in rec["result"][term] for v in row), f"bm-drift {term} vanishes")

rec = record("normcheck", "--spec", data("zero.spec"))
check(rec["result"]["norm_integral"] == 0.0 and rec["result"]["pi_gate"] == "pass", "zero process norm")

record("list")

# validation
for name in ("bm-drift", "ou-theta-t", "jacobi-jumps"):
    rec = record("validate", "--builtin", name, "--kmax", "2", "--paths", "20000")
    check(rec is not None and rec["result"]["verdict"] == "pass", f"validate {name}")
rec = record("validate", "--spec", data("wrong_kernel.spec"), "--kmax", "2", "--paths", "20000", code=4)

# input errors
p = run("moment", "--spec", data("syntax_error.spec"), "--k", "1")
check(p.returncode == 2 and "line 5, column 8" in p.stderr, f"syntax error report: {p.stderr.strip()}")
p = run("simulate", "--spec", data("missing_sampler.spec"), "--paths", "100")
check(p.returncode == 2, f"missing sampler exit {p.returncode}")
p = run("moment", "--builtin", "nope", "--k", "1")
check(p.returncode == 2, f"unknown builtin exit {p.returncode}")
p = run("moment", "--builtin", "bm-drift", "--k", "1", "--bogus")
check(p.returncode == 2, f"unknown flag exit {p.returncode}")
p = run("moment", "--builtin", "bm-drift", "--k", "1", "--t", "7")
check(p.returncode == 2, f"time past the horizon exit {p.returncode}")

# CSV
p = run("simulate", "--builtin", "ou-theta-t", "--paths", "100", "--format", "csv", "--k", "1", "--k", "2")
rows = list(csv.reader(io.StringIO(p.stdout)))
check(p.returncode == 0 and len(rows) == 2 and len(rows[0]) == len(rows[1]), "CSV has a header and one row")
check("result.moments.1.mean" in rows[0], "CSV flattens nested moments")

# determinism across runs and thread counts
sim = ("simulate", "--builtin", "jacobi-jumps", "--paths", "5000", "--steps", "100", "--seed", "7")
means = []
for threads in ("1", "3", "1"):
    env = dict(os.environ, POLYMAG_THREADS=threads)
    rec = record(*sim, env=env)
    means.append(rec["result"]["moments"][0]["mean"])
check(len(set(means)) == 1, f"simulate is deterministic: {means}")

# show round trip
p = run("show", "--builtin", "jacobi-jumps", "--param", "alpha=0.25")
with tempfile.NamedTemporaryFile("w", suffix=".spec", delete=False) as f:
    f.write(p.stdout)
try:
    a = record("moment", "--builtin", "jacobi-jumps", "--param", "alpha=0.25", "--k", "2", "--x", "0.3")
    b = record("moment", "--spec", f.name, "--k", "2", "--x", "0.3")
    check(a["result"]["value"] == b["result"]["value"], "show output reproduces the builtin")
finally:
    os.unlink(f.name)

for message in failures:
    print("FAIL:", message)
print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
