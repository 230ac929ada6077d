from hypothesis import strategies as st

from machmin import Instance, Job


@st.composite
def small_instances(draw, max_n=5, horizon=12, max_p=4, min_n=1):
    n = draw(st.integers(min_n, max_n))
    jobs = []
    for i in range(n):
        p = draw(st.integers(1, max_p))
        r = draw(st.integers(0, horizon - p))
        d = draw(st.integers(r + p, horizon))
        jobs.append(Job(i, r, d, p))
    return Instance(jobs)


def random_instance(rng, n, horizon, max_p):
    jobs = []
    for i in range(n):
        p = rng.randint(1, max_p)
        r = rng.randint(0, horizon - p)
        jobs.append(Job(i, r, rng.randint(r + p, horizon), p))
    return Instance(jobs)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
