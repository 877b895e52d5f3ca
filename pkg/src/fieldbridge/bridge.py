"""Embedded guest-script runtime and host<->guest data transfer primitives.

The host keeps numerical fields in :class:`~fieldbridge.fields.FieldBuffer`
objects; guest code is plain Python source loaded at run time and executed
inside a dedicated global namespace (the *scope*). Because the guest runs in
the host process and shares its address space, two transfer families exist:

* pass by copy - values are duplicated into guest-owned storage, either one
  element at a time (``put_element``/``get_element``) or as a whole field
  (``put_field_copy``/``get_field_copy``);
* pass by reference - the host publishes a buffer's raw byte address and
  shape into the scope, and a guest-side helper builds an array view over
  that memory (``publish_field_by_ref``). Guest writes through the view land
  directly in the host buffer; nothing is copied either way.

By-reference publication is wrapped in a :class:`RefLease`: while a lease is
active the host buffer is pinned (referenced, never resized or relocated),
and releasing the lease deletes the guest-side names. Guest code must not
retain a view past its lease; doing so is undefined behaviour, exactly like
dereferencing a stale pointer.

Only one live :class:`Session` may exist per process, and every operation on
it must run on the thread that opened it. Guest exceptions never propagate
raw: they surface as :class:`GuestError` carrying the guest traceback.
"""

from __future__ import annotations

import enum
import os
import threading
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fields import FieldBuffer

__all__ = [
    "TransferStrategy",
    "GuestErrorKind",
    "GuestError",
    "CopyStats",
    "RefLease",
    "Session",
    "open_session",
    "close_session",
    "load_script",
    "set_scalar",
    "get_scalar",
    "exec_statement",
    "put_field_copy",
    "get_field_copy",
    "put_element",
    "get_element",
    "publish_field_by_ref",
    "release_lease",
]


class TransferStrategy(enum.Enum):
    """How field data crosses the host/guest boundary during one harness run."""

    PER_ELEMENT_COPY = "per-element"
    WHOLE_FIELD_COPY = "whole-field"
    BY_REFERENCE = "by-ref"

    @classmethod
    def from_name(cls, name: str) -> "TransferStrategy":
        for strategy in cls:
            if strategy.value == name:
                return strategy
        raise ValueError(f"unknown strategy {name!r}; use one of {[s.value for s in cls]}")


class GuestErrorKind(enum.Enum):
    INIT_FAILURE = "InitFailure"
    SCRIPT_NOT_FOUND = "ScriptNotFound"
    SYNTAX_ERROR = "SyntaxError"
    RUNTIME_ERROR = "RuntimeError"
    NAME_MISSING = "NameMissing"
    SHAPE_MISMATCH = "ShapeMismatch"
    TYPE_MISMATCH = "TypeMismatch"


class GuestError(Exception):
    """Any failure crossing the host/guest boundary, including lifecycle misuse.

    ``message`` carries the guest traceback text verbatim when the failure
    originated in guest code.
    """

    def __init__(self, kind: GuestErrorKind, message: str):
        super().__init__(f"{kind.value}: {message}")
        self.kind = kind
        self.message = message


@dataclass
class CopyStats:
    """Call and byte counters for the four copy-path operations.

    By-reference publication does not touch these; a zero-delta across a
    by-reference exchange is how tests assert that nothing was copied.
    """

    put_field_calls: int = 0
    get_field_calls: int = 0
    put_element_calls: int = 0
    get_element_calls: int = 0
    bytes_to_guest: int = 0
    bytes_from_guest: int = 0

    @property
    def bytes_copied(self) -> int:
        return self.bytes_to_guest + self.bytes_from_guest

    def snapshot(self) -> "CopyStats":
        return CopyStats(**self.__dict__)


@dataclass
class RefLease:
    """A live publication of one host buffer's address and shape to the guest.

    While ``active`` the buffer is pinned. ``shape`` records the host-side
    (n_elements, n_components); the guest-facing shape collapses c == 1
    fields to 1-D, matching the copy-path convention.
    """

    guest_name: str
    address: int
    shape: tuple[int, int]
    element_width: int = 8          # bytes; 64-bit floats only
    active: bool = True
    _session: "Session | None" = field(default=None, repr=False)
    _pinned: np.ndarray | None = field(default=None, repr=False)


# Two-line pattern executed at session open: build a float64 array view over
# a raw byte address. Helper names are prefixed to stay out of script authors'
# way; ``view_from_address`` itself is the documented guest-visible entry.
_GUEST_PREAMBLE = """\
import ctypes as _bridge_ctypes
import numpy as _bridge_np

def view_from_address(address, shape):
    size = 1
    for extent in shape:
        size = size * extent
    if size == 0:
        return _bridge_np.empty(shape, dtype=_bridge_np.float64)
    pointer = _bridge_ctypes.cast(int(address), _bridge_ctypes.POINTER(_bridge_ctypes.c_double))
    return _bridge_np.ctypeslib.as_array(pointer, shape=tuple(shape))
"""

# The one live session per process, if any.
_live_session: "Session | None" = None


class Session:
    """Handle to the embedded guest runtime: one global scope plus lifecycle state.

    All operations must run on the thread that opened the session. The scope
    is cumulative: every ``load_script``/``exec_statement`` adds to the same
    global namespace, mirroring how an embedded interpreter's ``__main__``
    module behaves.
    """

    def __init__(self) -> None:
        self.scope: dict = {}
        self.initialized = False
        self.owner_thread = threading.get_ident()
        self.copy_stats = CopyStats()
        self._leases: dict[str, RefLease] = {}
        self._code_cache: dict[str, object] = {}

    def active_leases(self) -> list[RefLease]:
        return list(self._leases.values())

    def __enter__(self) -> "Session":
        return self

    def __exit__(self, *exc_info) -> None:
        if self.initialized:
            close_session(self)

    # internal -----------------------------------------------------------

    def _check_usable(self) -> None:
        if not self.initialized:
            raise GuestError(GuestErrorKind.RUNTIME_ERROR, "session is closed")
        if threading.get_ident() != self.owner_thread:
            raise GuestError(
                GuestErrorKind.RUNTIME_ERROR,
                "session used from a thread other than its owner; the bridge is not thread-safe",
            )

    def _exec(self, statement: str) -> None:
        code = self._code_cache.get(statement)
        if code is None:
            try:
                code = compile(statement, "<guest-statement>", "exec")
            except SyntaxError:
                raise GuestError(GuestErrorKind.SYNTAX_ERROR, traceback.format_exc()) from None
            self._code_cache[statement] = code
        try:
            exec(code, self.scope)
        except Exception:
            raise GuestError(GuestErrorKind.RUNTIME_ERROR, traceback.format_exc()) from None


def open_session() -> Session:
    """Start the embedded guest runtime and return its session handle.

    The runtime is initialized exactly once per session: a fresh global
    scope is created and the view-construction preamble is executed in it.
    Opening while another session is live is a hard error.
    """
    global _live_session
    if _live_session is not None:
        raise GuestError(
            GuestErrorKind.RUNTIME_ERROR,
            "a live session already exists in this process; close it before opening another",
        )
    session = Session()
    try:
        exec(compile(_GUEST_PREAMBLE, "<guest-preamble>", "exec"), session.scope)
    except Exception:
        raise GuestError(GuestErrorKind.INIT_FAILURE, traceback.format_exc()) from None
    session.initialized = True
    _live_session = session
    return session


def close_session(session: Session) -> None:
    """Finalize the guest runtime; the session becomes unusable.

    Fails if any by-reference lease is still active, because tearing down
    the scope while the guest may hold views over host memory is unsafe.
    """
    global _live_session
    session._check_usable()
    if session._leases:
        names = sorted(session._leases)
        raise GuestError(
            GuestErrorKind.RUNTIME_ERROR,
            f"cannot close session with active leases: {names}; release them first",
        )
    session.scope.clear()
    session.initialized = False
    if _live_session is session:
        _live_session = None


def load_script(session: Session, source: str | os.PathLike) -> None:
    """Execute a guest script's top level, adding its definitions to the scope.

    ``source`` is either a filesystem path or inline script text. A plain
    string is treated as a path when it contains no newline and either names
    an existing file or ends in ``.py``; anything else is inline source.
    Pass a ``pathlib.Path`` to force path semantics.
    """
    session._check_usable()
    text, filename = _resolve_script_source(source)
    try:
        code = compile(text, filename, "exec")
    except SyntaxError:
        raise GuestError(GuestErrorKind.SYNTAX_ERROR, traceback.format_exc()) from None
    try:
        exec(code, session.scope)
    except Exception:
        raise GuestError(GuestErrorKind.RUNTIME_ERROR, traceback.format_exc()) from None


def _resolve_script_source(source: str | os.PathLike) -> tuple[str, str]:
    if isinstance(source, os.PathLike):
        path = Path(source)
    elif "\n" not in source and (source.endswith(".py") or Path(source).is_file()):
        path = Path(source)
    else:
        return source, "<guest-script>"
    if not path.is_file():
        raise GuestError(GuestErrorKind.SCRIPT_NOT_FOUND, f"script not found: {path}")
    return path.read_text(), str(path)


def set_scalar(session: Session, name: str, value: float) -> None:
    """Copy one float into the guest scope under ``name``."""
    session._check_usable()
    _check_identifier(name)
    session.scope[name] = float(value)


def get_scalar(session: Session, name: str) -> float:
    """Copy one numeric guest value back to the host."""
    session._check_usable()
    value = _lookup(session, name)
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise GuestError(
            GuestErrorKind.TYPE_MISMATCH,
            f"guest variable {name!r} is {type(value).__name__}, expected a number",
        )
    return float(value)


def exec_statement(session: Session, statement: str) -> None:
    """Execute one or more guest statements in the session scope.

    Side effects persist: names assigned here are visible to all later
    operations. Guest exceptions surface as GuestError with the full guest
    traceback text.
    """
    session._check_usable()
    session._exec(statement)


def put_field_copy(session: Session, name: str, fld: FieldBuffer) -> None:
    """Copy an entire field into the guest scope as a numeric array.

    The guest sees a 1-D array of length n for single-component fields and
    an (n, c) array otherwise. The guest owns its copy; later host-side
    changes to the field are invisible to it.
    """
    session._check_usable()
    _check_identifier(name)
    arr = fld.data
    if fld.n_components == 1:
        guest_arr = arr.reshape(fld.n_elements).copy()
    else:
        guest_arr = arr.copy()
    session.scope[name] = guest_arr
    session.copy_stats.put_field_calls += 1
    session.copy_stats.bytes_to_guest += guest_arr.nbytes


def get_field_copy(session: Session, name: str, expected_shape: tuple[int, int]) -> FieldBuffer:
    """Copy a guest array back into a host-owned FieldBuffer.

    ``expected_shape`` is the host-side (n_elements, n_components); the guest
    value may be 1-D for c == 1. Any other shape is rejected.
    """
    session._check_usable()
    n, c = expected_shape
    value = _lookup(session, name)
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise GuestError(
            GuestErrorKind.TYPE_MISMATCH,
            f"guest variable {name!r} is not a numeric array",
        ) from None
    if not _shape_matches(arr.shape, n, c):
        raise GuestError(
            GuestErrorKind.SHAPE_MISMATCH,
            f"guest variable {name!r} has shape {arr.shape}, expected ({n}, {c})",
        )
    out = FieldBuffer(arr.reshape(n, c).copy())
    session.copy_stats.get_field_calls += 1
    session.copy_stats.bytes_from_guest += out.data.nbytes
    return out


def _shape_matches(shape: tuple[int, ...], n: int, c: int) -> bool:
    if c == 1:
        return shape in ((n,), (n, 1))
    return shape == (n, c)


def put_element(session: Session, name: str, fld: FieldBuffer, index: int) -> None:
    """Copy a single element of a field into the guest scope.

    Single-component elements arrive as a plain float, multi-component ones
    as a length-c array.
    """
    session._check_usable()
    _check_identifier(name)
    if not 0 <= index < fld.n_elements:
        raise GuestError(
            GuestErrorKind.SHAPE_MISMATCH,
            f"element index {index} out of range for field with {fld.n_elements} elements",
        )
    if fld.n_components == 1:
        session.scope[name] = float(fld.data[index, 0])
    else:
        session.scope[name] = fld.data[index].copy()
    session.copy_stats.put_element_calls += 1
    session.copy_stats.bytes_to_guest += fld.n_components * 8


def get_element(session: Session, name: str) -> np.ndarray:
    """Copy one staged element back from the guest as a length-c float array."""
    session._check_usable()
    value = _lookup(session, name)
    if isinstance(value, bool):
        raise GuestError(GuestErrorKind.TYPE_MISMATCH, f"guest variable {name!r} is a bool")
    if isinstance(value, (int, float, np.integer, np.floating)):
        row = np.array([float(value)])
    else:
        try:
            row = np.asarray(value, dtype=np.float64)
        except (TypeError, ValueError):
            raise GuestError(
                GuestErrorKind.TYPE_MISMATCH,
                f"guest variable {name!r} is not numeric",
            ) from None
        if row.ndim != 1:
            raise GuestError(
                GuestErrorKind.SHAPE_MISMATCH,
                f"guest variable {name!r} has shape {row.shape}, expected a single element",
            )
        row = row.copy()
    session.copy_stats.get_element_calls += 1
    session.copy_stats.bytes_from_guest += row.nbytes
    return row


def publish_field_by_ref(
    session: Session,
    name: str,
    fld: FieldBuffer,
    construct_view: bool = True,
) -> RefLease:
    """Publish a host buffer to the guest by raw address; nothing is copied.

    Writes ``<name>_address`` (unsigned byte address of element 0) and
    ``<name>_shape`` into the scope, then - unless ``construct_view`` is
    False - executes the view-construction helper so that ``<name>`` is an
    array view over the host memory. Guest writes through the view are
    immediately visible in the host buffer.

    The buffer stays pinned until :func:`release_lease`. Resizing it, or
    letting the guest keep the view past the lease, is undefined behaviour
    and forbidden by contract.
    """
    session._check_usable()
    _check_identifier(name)
    if name in session._leases:
        raise GuestError(
            GuestErrorKind.RUNTIME_ERROR,
            f"a lease named {name!r} is already active",
        )
    address = fld.data.ctypes.data
    if address % 8 != 0:
        raise GuestError(
            GuestErrorKind.RUNTIME_ERROR,
            f"buffer address {address:#x} is not 8-byte aligned",
        )
    if fld.n_components == 1:
        guest_shape: tuple[int, ...] = (fld.n_elements,)
    else:
        guest_shape = (fld.n_elements, fld.n_components)
    session.scope[f"{name}_address"] = address
    session.scope[f"{name}_shape"] = guest_shape
    lease = RefLease(
        guest_name=name,
        address=address,
        shape=(fld.n_elements, fld.n_components),
        _session=session,
        _pinned=fld.data,
    )
    session._leases[name] = lease
    if construct_view:
        try:
            session._exec(f"{name} = view_from_address({name}_address, {name}_shape)")
        except GuestError:
            del session._leases[name]
            lease.active = False
            raise
    return lease


def release_lease(lease: RefLease) -> None:
    """End a by-reference publication: delete guest names, unpin the buffer."""
    if not lease.active:
        raise GuestError(GuestErrorKind.RUNTIME_ERROR, "lease already released")
    session = lease._session
    assert session is not None
    session._check_usable()
    for suffix in ("", "_address", "_shape"):
        session.scope.pop(f"{lease.guest_name}{suffix}", None)
    session._leases.pop(lease.guest_name, None)
    lease.active = False
    lease._session = None
    lease._pinned = None


def _lookup(session: Session, name: str):
    if name not in session.scope:
        raise GuestError(GuestErrorKind.NAME_MISSING, f"no guest variable named {name!r}")
    return session.scope[name]


def _check_identifier(name: str) -> None:
    if not name.isidentifier():
        raise ValueError(f"{name!r} is not a valid guest identifier")
