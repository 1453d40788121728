import pytest

from ilp_workbench import selftest
from ilp_workbench.config import Config
from ilp_workbench.errors import (BudgetExceeded, ConfigError, IlpError, PreconditionError,
                                  VerificationError)
from ilp_workbench.report import COLUMNS
from ilp_workbench.selftest import (SUITES, _Suite, _Tally, certify_refutation,
                                    run_selftest)
from ilp_workbench.syntax import Imp, parse


def test_suite_names():
    assert list(SUITES) == ["axioms", "cutelim", "interpolation", "fixpoint", "oracle",
                            "semantics", "embedding", "determinism"]


def test_unknown_suite():
    with pytest.raises(ConfigError, match="unknown suites"):
        run_selftest(suites=["axioms", "nonsense"])


class TestSuiteRows:
    def test_statuses(self):
        suite = _Suite("demo")

        def over_budget():
            raise BudgetExceeded("search", 10)

        def failing():
            raise VerificationError("mismatch")

        assert suite.run("ok", lambda: "fine") == "pass"
        assert suite.run("slow", over_budget) == "budget"
        assert suite.run("bad", failing) == "fail"
        assert [row["status"] for row in suite.rows] == ["pass", "budget", "fail"]
        assert suite.rows[2]["detail"] == "VerificationError: mismatch"
        assert all(set(row) == set(COLUMNS) for row in suite.rows)

    def test_other_exceptions_escape(self):
        def broken():
            raise KeyError("x")

        with pytest.raises(KeyError):
            _Suite("demo").run("broken", broken)


class TestTally:
    def test_all_pass(self):
        tally = _Tally()
        tally.record(lambda: True, "a")
        tally.record(lambda: True, "b")
        assert tally.close() == "2 pass, 0 fail, 0 budget"

    def test_failure_wins(self):
        tally = _Tally()

        def over_budget():
            raise BudgetExceeded("search", 1)

        tally.record(over_budget, "a")
        tally.record(lambda: False, "b")
        with pytest.raises(VerificationError, match="first failure b"):
            tally.close()

    def test_budget_only(self):
        tally = _Tally()

        def over_budget():
            raise BudgetExceeded("search", 1)

        tally.record(over_budget, "a")
        tally.record(lambda: True, "b")
        with pytest.raises(BudgetExceeded):
            tally.close()


def test_certify_refutation_by_search(small_config):
    detail = certify_refutation(parse("p |> q"), small_config)
    assert detail == "2-world countermodel by search"


def test_certify_refutation_rejects_theorem(small_config):
    with pytest.raises(PreconditionError):
        certify_refutation(parse("p -> p"), small_config.replace(max_worlds=1))


@pytest.mark.slow
def test_oracle_suite(small_config):
    frame = run_selftest(small_config, ["oracle"])
    assert set(frame["suite"]) == {"oracle"}
    assert (frame["status"] == "pass").all()
    assert list(frame["item"])[-1] == "canonical countermodels"


@pytest.mark.slow
def test_determinism_suite(small_config):
    frame = run_selftest(small_config, ["determinism"])
    assert list(frame["item"]) == ["generators", "proofs", "models"]
    assert (frame["status"] == "pass").all()


@pytest.mark.slow
def test_parallel_run_keeps_order():
    config = Config(budget=50_000, max_size=1, vars=("p",), max_worlds=1, jobs=2)
    frame = run_selftest(config, ["oracle", "determinism"])
    assert list(dict.fromkeys(frame["suite"])) == ["oracle", "determinism"]


def test_dead_worker_becomes_an_error(monkeypatch):
    class Dead:
        def __init__(self, max_workers=None):
            pass

        def __enter__(self):
            return self

        def __exit__(self, *exc):
            return False

        def map(self, fn, jobs):
            raise selftest.BrokenProcessPool("worker killed")

    monkeypatch.setattr(selftest.concurrent.futures, "ProcessPoolExecutor", Dead)
    config = Config(max_size=1, vars=("p",), jobs=2)
    with pytest.raises(IlpError, match="worker died"):
        run_selftest(config, ["oracle", "determinism"])


def test_cut_pairs_include_idle_rhd_context():
    config = Config(vars=("p", "q"))
    found = [(a, b) for a, b, persistence in selftest._cut_pairs(config)
             if persistence and isinstance(a, Imp)]
    assert (parse("(q |> p) & (p |> q) -> p |> q | false"),
            parse("(q |> p) & (p |> q) -> p & q |> (q | false) | p")) in found
