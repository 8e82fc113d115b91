import json
import time
from pathlib import Path

import pytest

from crt_equidist import cli
from crt_equidist.generators import IntPolynomial, roots_system


@pytest.fixture(scope="session")
def run_cli():
    """In-process CLI invocation asserting the exit code."""

    def run(args, expect=0):
        argv = [str(a) for a in args]
        code = cli.main(argv)
        assert code == expect, f"exit code {code} != {expect} for {argv}"
        return code

    return run


@pytest.fixture(scope="session")
def x2p1():
    return roots_system(IntPolynomial((1, 0, 1)))


@pytest.fixture(scope="session")
def poisson_f1_1e6(run_cli, tmp_path_factory):
    """The big single-threaded histogram run at x = 10^6, shared by the
    table acceptance checks. Takes a few minutes; returns (outdir, seconds)."""
    out = tmp_path_factory.mktemp("poisson_f1_1e6")
    start = time.monotonic()
    run_cli(["table", "--pseudo", "f1", "--x", "1000000",
             "--threads", "1", "--quiet", "--out", out])
    return out, time.monotonic() - start


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
