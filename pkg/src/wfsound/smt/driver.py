"""Subprocess driver for SMT-LIB2 solvers.

Queries run in a child solver process fed through stdin. The default
backend is the bundled solver (running as `python -m
wfsound.smt.solver`); an external solver such as z3 is used when
configured or found on PATH. Sessions support push/pop for incremental
search and enforce wall-clock deadlines by killing the child.
"""

from __future__ import annotations

import os
import select
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass, field

from .sexpr import SexprError, parse_all, parse_value


class SolverError(Exception):
    pass


def default_solver_argv(solver: str | None = None) -> list:
    """Argument vector for the configured solver.

    `solver` is a binary name/path ("z3" style, fed SMT-LIB2 on stdin)
    or None for autodetection: z3 when present, else the bundled
    solver.
    """
    if solver is None:
        found = shutil.which("z3")
        if found:
            return [found, "-in", "-smt2"]
        return [sys.executable, "-m", "wfsound.smt.solver"]
    base = os.path.basename(solver)
    if base == "z3" or base.startswith("z3-"):
        return [solver, "-in", "-smt2"]
    return [solver]


@dataclass
class SolveResult:
    status: str                      # "sat" | "unsat" | "unknown"
    model: dict = field(default_factory=dict)
    detail: str = ""


class SolverSession:
    """One solver child process with incremental interaction."""

    def __init__(self, solver: str | None = None, timeout: float | None = None):
        self.argv = default_solver_argv(solver)
        self.timeout = timeout
        try:
            self.proc = subprocess.Popen(
                self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL)
        except OSError as exc:
            raise SolverError(f"cannot start solver {self.argv[0]}: {exc}")
        self._buf = b""

    def send(self, text: str) -> None:
        if self.proc.poll() is not None:
            raise SolverError("solver process exited")
        try:
            self.proc.stdin.write(text.encode())
            self.proc.stdin.flush()
        except BrokenPipeError:
            raise SolverError("solver closed its input") from None

    def _read_until(self, done, deadline) -> str:
        fd = self.proc.stdout.fileno()
        while True:
            text = self._buf.decode(errors="replace")
            if done(text):
                return text
            wait = None
            if deadline is not None:
                wait = deadline - _now()
                if wait <= 0:
                    self.close()
                    raise TimeoutError("solver deadline exceeded")
            ready, _, _ = select.select([fd], [], [], wait)
            if not ready:
                self.close()
                raise TimeoutError("solver deadline exceeded")
            chunk = os.read(fd, 65536)
            if not chunk:
                raise SolverError(
                    "solver closed its output: " + text.strip()[-200:])
            self._buf += chunk

    def _take_line(self, deadline) -> str:
        text = self._read_until(lambda s: "\n" in s, deadline)
        line, rest = text.split("\n", 1)
        self._buf = rest.encode()
        return line.strip()

    def _take_sexpr(self, deadline):
        def complete(s):
            try:
                return bool(parse_all(s))
            except SexprError:
                return False
        text = self._read_until(complete, deadline)
        self._buf = b""
        return parse_all(text)[0]

    def _deadline(self):
        if self.timeout is None:
            return None
        return _now() + self.timeout

    def check_sat(self) -> str:
        self.send("(check-sat)\n")
        line = self._take_line(self._deadline())
        if line not in ("sat", "unsat", "unknown"):
            raise SolverError(f"unexpected check-sat answer: {line!r}")
        return line

    def get_values(self, names) -> dict:
        names = list(names)
        if not names:
            return {}
        self.send("(get-value (" + " ".join(names) + "))\n")
        node = self._take_sexpr(self._deadline())
        if not isinstance(node, list):
            raise SolverError(f"unexpected get-value answer: {node!r}")
        out = {}
        for pair in node:
            if not isinstance(pair, list) or len(pair) != 2:
                raise SolverError("malformed get-value pair")
            out[pair[0] if isinstance(pair[0], str) else None] = \
                parse_value(pair[1])
        return {name: out[name] for name in names if name in out}

    def push(self) -> None:
        self.send("(push 1)\n")

    def pop(self) -> None:
        self.send("(pop 1)\n")

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.proc.kill()
            except OSError:
                pass
        self.proc.wait()
        if self.proc.stdin:
            self.proc.stdin.close()
        if self.proc.stdout:
            self.proc.stdout.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def solve_script(script, timeout: float | None = None,
                 solver: str | None = None, values=()) -> SolveResult:
    """One-shot satisfiability check of a script.

    `script` is an SmtScript or raw SMT-LIB2 text. On sat, the model
    restricted to `values` identifiers is returned with exact rational
    parsing. Deadline overruns yield status "unknown" with the child
    killed.
    """
    text = script if isinstance(script, str) else script.text()
    session = SolverSession(solver=solver, timeout=timeout)
    try:
        session.send(text)
        status = session.check_sat()
        model = {}
        if status == "sat" and values:
            model = session.get_values(values)
        return SolveResult(status, model)
    except TimeoutError:
        return SolveResult("unknown", detail="timeout")
    finally:
        session.close()


def _now() -> float:
    return time.monotonic()
