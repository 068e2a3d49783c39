"""Drive an external SMT-LIB2 solver process.

One process per VC by default; a persistent session reuses one process
with push/pop around each query. The solver command is a shell-style
string, e.g. "z3 -in" or "python -m boundcheck.smt.refsolver".
"""

from __future__ import annotations

import queue
import shlex
import subprocess
import threading
import time
from typing import Optional

from ..errors import ProtocolError, SolverSpawnError
from ..logic import VC
from .script import emit_script
from .verdict import Invalid, SolverVerdict, Unknown, Valid

KILL_GRACE_S = 0.5


def check_external(vc: VC, solver_cmd: str, timeout_ms: int = 10_000) -> SolverVerdict:
    """Spawn the solver, feed the script, map unsat->Valid, sat->Invalid."""
    argv = shlex.split(solver_cmd)
    script = emit_script(vc, get_model=True) + "(exit)\n"
    try:
        proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
        )
    except (OSError, ValueError) as exc:
        raise SolverSpawnError(f"cannot launch solver {argv[0]!r}: {exc}")
    try:
        out, _ = proc.communicate(script, timeout=timeout_ms / 1000.0)
    except subprocess.TimeoutExpired:
        proc.kill()
        try:
            proc.communicate(timeout=KILL_GRACE_S)
        except subprocess.TimeoutExpired:
            pass
        return Unknown("timeout")
    return _parse_reply(out)


def _parse_reply(out: str) -> SolverVerdict:
    lines = [ln.strip() for ln in out.splitlines() if ln.strip()]
    if not lines:
        raise ProtocolError("solver produced no output")
    verdict = lines[0]
    if verdict == "unsat":
        return Valid()
    if verdict == "sat":
        model = "\n".join(lines[1:]) if len(lines) > 1 else None
        if model and model.startswith("(error"):
            model = None
        return Invalid(model)
    if verdict == "unknown":
        return Unknown("solver answered unknown")
    raise ProtocolError(f"unparseable solver reply: {verdict!r}")


class PersistentSolver:
    """A single solver process reused across VCs (push/pop per query).

    Not thread-safe; serialize access externally.
    """

    def __init__(self, solver_cmd: str, timeout_ms: int = 10_000):
        self.argv = shlex.split(solver_cmd)
        self.timeout_ms = timeout_ms
        try:
            self.proc = subprocess.Popen(
                self.argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except (OSError, ValueError) as exc:
            raise SolverSpawnError(f"cannot launch solver {self.argv[0]!r}: {exc}")
        # a reader thread sidesteps buffered-stream/select interactions
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def check(self, vc: VC) -> SolverVerdict:
        if self.proc.poll() is not None:
            raise SolverSpawnError("persistent solver process exited")
        script = emit_script(vc, get_model=False)
        body = script.split("\n", 1)[1]  # set-logic only valid once
        self._send("(push 1)\n" + body)
        try:
            line = self._read_line()
            if line == "unsat":
                out: SolverVerdict = Valid()
            elif line == "sat":
                self._send("(get-model)\n")
                model = self._read_sexp()
                out = Invalid(model)
            elif line == "unknown":
                out = Unknown("solver answered unknown")
            else:
                raise ProtocolError(f"unparseable solver reply: {line!r}")
        finally:
            self._send("(pop 1)\n")
        return out

    def _send(self, text: str) -> None:
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write(text)
            self.proc.stdin.flush()
        except BrokenPipeError as exc:
            raise SolverSpawnError(f"solver pipe closed: {exc}")

    def _read_line(self) -> str:
        deadline = time.monotonic() + self.timeout_ms / 1000.0
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self.close()
                raise ProtocolError("persistent solver timed out")
            try:
                line = self._lines.get(timeout=remaining)
            except queue.Empty:
                continue
            if line is None:
                raise SolverSpawnError("persistent solver closed its output")
            line = line.strip()
            if line:
                return line

    def _read_sexp(self) -> str:
        depth = 0
        lines: list[str] = []
        while True:
            line = self._read_line()
            lines.append(line)
            depth += line.count("(") - line.count(")")
            if depth <= 0:
                return "\n".join(lines)

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self._send("(exit)\n")
            except SolverSpawnError:
                pass
            try:
                self.proc.wait(timeout=KILL_GRACE_S)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()

    def __enter__(self) -> "PersistentSolver":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
