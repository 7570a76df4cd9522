import pytest

from sinusim.config import load_config
from sinusim.loop import ScriptedSource
from sinusim.runner import make_task_spec, run_scripted_session_in_memory
from sinusim.session import TaskKind


def straight_line_samples(start=(0.0, 0.0, 5.0), end=(0.0, 0.0, -26.0),
                          duration=31.0, rate_hz=100.0):
    """Constant-speed straight line, sampled at ``rate_hz``."""
    n = int(duration * rate_hz)
    out = []
    for i in range(n + 1):
        a = i / n
        p = tuple(s + a * (e - s) for s, e in zip(start, end))
        out.append((i / rate_hz, p))
    return out


@pytest.fixture(scope="session")
def default_config():
    return load_config(None)


@pytest.fixture(scope="session")
def evaluation_log(default_config):
    """One scripted evaluation run: approach, fracture, reach the goal."""
    spec = make_task_spec(default_config, TaskKind.EVALUATION, level=3, seed=7)
    source = ScriptedSource(straight_line_samples())
    return run_scripted_session_in_memory(default_config, spec, source,
                                          duration=35.0)
