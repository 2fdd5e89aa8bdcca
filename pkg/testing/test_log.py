import logging

import pytest

from pivotfpe.exceptions import InvalidSeries
from pivotfpe.log import call_sig
from pivotfpe.log import create_child_logger
from pivotfpe.log import create_item_logger
from pivotfpe.log import create_logger
from pivotfpe.log import logged
from pivotfpe.log import PrependPathAdapter
from pivotfpe.prediction import SequentialEstimator


class Recorder:
    def __init__(self, logger):
        self.logger = create_logger("Recorder", logger)

    @logged(log_args=True, log_result=True)
    def double(self, value):
        return 2 * value

    @logged()
    def reject(self):
        raise InvalidSeries("too short")

    @logged()
    def crash(self):
        raise RuntimeError("boom")


@pytest.fixture
def logger():
    return logging.getLogger("pivotfpe.test")


@pytest.mark.parametrize(
    "args, kwargs, sig",
    [
        ((), {}, "()"),
        ((1,), {}, "(1)"),
        ((), {"a": 1}, "(a=1)"),
        ((1,), {"a": 1}, "(1, a=1)"),
    ],
)
def test_call_sig(args, kwargs, sig):
    assert call_sig(args, kwargs) == sig


def test_logger_paths(logger):
    root = create_logger("experiment", logger)
    assert isinstance(root, PrependPathAdapter)
    assert root.extra["path"] == "experiment"
    child = create_child_logger(root, "ma-poly[n=100]")
    assert child.extra["path"] == "experiment/ma-poly[n=100]"
    item = create_item_logger(child, 3)
    assert item.extra["path"] == "experiment/ma-poly[n=100][3]"
    assert create_logger("estimate_order", item).extra["path"].endswith("[3]/estimate_order")
    assert item.logger is logger


def test_default_logger_is_silent():
    adapter = create_logger("quiet")
    assert adapter.logger.name == "pivotfpe_null"


def test_path_is_prepended(logger, caplog):
    caplog.set_level(logging.INFO, logger=logger.name)
    create_logger("order", logger).info("hello %d", 3)
    assert caplog.messages == ["[order]: hello 3"]


def test_logged_result(logger, caplog):
    caplog.set_level(logging.DEBUG, logger=logger.name)
    assert Recorder(logger).double(4) == 8
    assert caplog.messages[0] == "[Recorder]: double(4) started"
    assert caplog.messages[1].startswith("[Recorder]: double(4) -> 8 (elapsed")


def test_logged_package_error_is_a_warning(logger, caplog):
    caplog.set_level(logging.DEBUG, logger=logger.name)
    with pytest.raises(InvalidSeries):
        Recorder(logger).reject()
    assert caplog.records[-1].levelno == logging.WARNING
    assert "too short" in caplog.messages[-1]


def test_logged_other_error_is_logged_with_traceback(logger, caplog):
    caplog.set_level(logging.DEBUG, logger=logger.name)
    with pytest.raises(RuntimeError):
        Recorder(logger).crash()
    assert any(record.exc_info for record in caplog.records)


def test_estimator_logs_under_its_path(rng, logger, caplog):
    caplog.set_level(logging.DEBUG, logger=logger.name)
    SequentialEstimator(rng.standard_normal(50), logger=logger).m_path(2)
    assert any(message.startswith("[SequentialEstimator]") for message in caplog.messages)
