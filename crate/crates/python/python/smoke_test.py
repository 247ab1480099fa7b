"""Builds the extension with cargo and exercises the Python API."""

import json
import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[3]


def build() -> pathlib.Path:
    subprocess.run(["cargo", "build", "--release", "-p", "contactdyn-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "release" / "libpycontactdyn.so"
    out = pathlib.Path(tempfile.mkdtemp()) / "pycontactdyn.so"
    shutil.copy(lib, out)
    return out.parent


def main() -> None:
    sys.path.insert(0, str(build()))
    import pycontactdyn as cd

    e = cd.Expr("m*v^2/2 - gamma*s")
    assert str(e.diff("v").simplify()) == "(m * v)", str(e.diff("v"))
    assert e.eval({"m": 2.0, "v": 3.0, "gamma": 0.5, "s": 2.0}) == 8.0
    assert cd.Expr("2*x").equivalent(cd.Expr("x + x"))

    params = {"m": 1.0, "omega": 2.0, "gamma": 0.3}
    lag = cd.LagrangianSystem(["q"], ["v"], "s", "m*v^2/2 - m*omega^2*q^2/2 - gamma*s", params)
    ham = cd.HamiltonianSystem(["q"], ["p"], "s", "p^2/(2*m) + m*omega^2*q^2/2 + gamma*s", params)
    assert lag.legendre_residual(ham, [0.3, -0.2, 0.1]) < 1e-12
    assert max(abs(r) for r in ham.residuals([0.5, 1.0, -0.3])) < 1e-12

    times, states = lag.simulate([1.0, 0.0, 0.0], 5.0)
    wd = math.sqrt(4.0 - 0.3**2 / 4)
    q5 = math.exp(-0.75) * (math.cos(5 * wd) + 0.15 / wd * math.sin(5 * wd))
    assert abs(states[-1][0] - q5) < 1e-7
    assert times[-1] == 5.0

    assert cd.catalog() == ["damped_oscillator", "gravity_friction", "parachute"]
    for name in cd.catalog():
        passed, report = cd.check(f"catalog:{name}", points=50)
        assert passed, report
        assert json.loads(report)["system"] == name
    csv = cd.simulate("catalog:gravity_friction")
    assert csv.splitlines()[0].startswith("t,x,y,vx,vy,s")

    try:
        cd.Expr("1 +")
    except ValueError:
        pass
    else:
        raise AssertionError("parse error not raised")
    print("python bindings ok")


if __name__ == "__main__":
    main()
