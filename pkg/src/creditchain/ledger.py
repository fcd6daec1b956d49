"""Append-only simulated ledger executing registered contract kinds.

The ledger is a list of blocks, each holding at most one signed transaction;
``advance_block`` inserts empty blocks so tests can position height-sensitive
operations (expirations) precisely.  A transaction either deploys a new
contract or calls a function on an existing one.  Contract logic lives in
transition functions registered per kind; a transition computes the target's
next state and may read or stage other contracts through the call context,
but the whole transaction commits atomically — a rejection discards every
staged change and leaves all state exactly as it was, while the transaction
itself still lands in the log with its rejection reason.

Transitions must do a bounded amount of work per call: table lookups and a
fixed number of cross-contract reads, never iteration over a whole chain or
registry.  Anything that walks linked structures belongs to the off-chain
reader helpers, not in here.

Determinism is the load-bearing property.  Contract addresses hash the
deployer key and the global transaction sequence number, signatures are
deterministic, and no transition may consult anything outside (state,
transaction, height).  Re-executing an exported log therefore reproduces
every contract state byte for byte, which ``replay`` verifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, ClassVar, Optional, Protocol

from . import codec, crypto

EXPORT_MAGIC = b"CCLG"
EXPORT_VERSION = 1


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class LedgerError(Exception):
    """Base class for ledger-level failures."""


class UnknownAddress(LedgerError):
    """The transaction targets an address with no contract behind it."""


class BadSignature(LedgerError):
    """The transaction signature does not verify against its caller key."""


class ContractRejected(LedgerError):
    """A transition refused the call; carries a stable reason string."""

    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class ConstructorRejected(LedgerError):
    """A contract constructor refused the deployment."""

    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


class ReplayMismatch(LedgerError):
    """Re-executing an exported log did not reproduce the recorded outcome."""


# ---------------------------------------------------------------------------
# Core types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Address:
    """32-byte contract address, hashable and usable as a mapping key."""

    digest: bytes

    def __post_init__(self) -> None:
        if len(self.digest) != crypto.DIGEST_SIZE:
            raise ValueError("address must be 32 bytes")

    @property
    def hex(self) -> str:
        return self.digest.hex()

    def short(self) -> str:
        return self.digest.hex()[:12]

    def __repr__(self) -> str:  # keeps transcripts and asserts readable
        return f"Address({self.short()}…)"


def derive_address(deployer: bytes, seq: int, index: int = 0) -> Address:
    """Hash of (deployer key, global transaction sequence, creation index).

    ``index`` separates multiple contracts created inside one transaction,
    e.g. a factory minting on behalf of a caller.
    """
    return Address(crypto.digest(codec.pack(b"address", deployer, codec.u64(seq), codec.u16(index))))


@dataclass(frozen=True)
class Transaction:
    """A signed call or deployment.  ``target`` is None for deployments,
    in which case ``function`` names the contract kind to construct."""

    caller: bytes
    target: Optional[Address]
    function: str
    args: bytes
    signature: bytes
    block: int = -1

    def is_deploy(self) -> bool:
        return self.target is None


def signing_payload(caller: bytes, target: Optional[Address], function: str, args: bytes) -> bytes:
    """Canonical byte string covered by a transaction signature.

    Field order: marker, caller key, target address (empty for deploy),
    function name, argument bytes.
    """
    target_bytes = b"" if target is None else target.digest
    return codec.pack(b"transaction", caller, target_bytes, codec.text(function), args)


def make_transaction(
    caller: crypto.KeyPair,
    target: Optional[Address],
    function: str,
    args: bytes,
) -> Transaction:
    payload = signing_payload(caller.public.to_bytes(), target, function, args)
    return Transaction(
        caller=caller.public.to_bytes(),
        target=target,
        function=function,
        args=args,
        signature=crypto.sign(caller.private, payload),
    )


@dataclass(frozen=True)
class CallReceipt:
    accepted: bool
    reason: Optional[str]
    block: int
    seq: int
    result: Optional[bytes] = None
    created: tuple[Address, ...] = ()


@dataclass(frozen=True)
class HistoryEntry:
    block: int
    tx: Transaction
    state: Any


@dataclass(frozen=True)
class LogEntry:
    seq: int
    tx: Transaction
    accepted: bool
    reason: Optional[str]


# ---------------------------------------------------------------------------
# Contract kind registry
# ---------------------------------------------------------------------------


class ContractKind(Protocol):
    KIND: ClassVar[str]

    @staticmethod
    def construct(ctx: "CallContext", args: bytes) -> Any: ...

    @staticmethod
    def apply(state: Any, ctx: "CallContext", function: str, args: bytes) -> Any: ...

    @staticmethod
    def encode_state(state: Any) -> bytes: ...


CONTRACT_KINDS: dict[str, ContractKind] = {}


def register_contract(cls: Any) -> Any:
    """Class decorator adding a contract kind to the global registry."""
    kind = cls.KIND
    if kind in CONTRACT_KINDS and CONTRACT_KINDS[kind] is not cls:
        raise ValueError(f"contract kind {kind!r} registered twice")
    CONTRACT_KINDS[kind] = cls
    return cls


@dataclass
class _ContractRecord:
    kind: str
    cls: Any
    state: Any
    history: list[HistoryEntry]


class CallContext:
    """Restricted view of the ledger handed to a transition function.

    Exposes the caller key, the executing contract's address, the current
    block height, and staged cross-contract access.  All reads observe
    changes staged earlier in the same transaction; nothing becomes visible
    outside until the transaction commits.
    """

    def __init__(self, ledger: "Ledger", tx: Transaction, seq: int, self_address: Optional[Address]) -> None:
        self._ledger = ledger
        self._tx = tx
        self._seq = seq
        self.caller: bytes = tx.caller
        self.self_address = self_address
        self.height: int = ledger.height
        self.staged: dict[Address, Any] = {}
        self.created: dict[Address, tuple[Any, Any]] = {}  # addr -> (cls, state)
        self.result: Optional[bytes] = None

    def try_read(self, address: Address) -> Optional[tuple[str, Any]]:
        """(kind, state) for an address, or None if nothing lives there."""
        if address in self.created:
            cls, state = self.created[address]
            return cls.KIND, state
        record = self._ledger._contracts.get(address)
        if record is None:
            return None
        state = self.staged.get(address, record.state)
        return record.kind, state

    def stage(self, address: Address, new_state: Any) -> None:
        """Queue a state change for another contract touched by this call."""
        if address in self.created:
            cls, _ = self.created[address]
            self.created[address] = (cls, new_state)
        else:
            if address not in self._ledger._contracts:
                raise ContractRejected("UnknownAddress")
            self.staged[address] = new_state

    def deploy(self, kind: str, args: bytes) -> Address:
        """Create a child contract within the current transaction."""
        cls = CONTRACT_KINDS.get(kind)
        if cls is None:
            raise ContractRejected(f"UnknownKind({kind})")
        address = derive_address(self._tx.caller, self._seq, 1 + len(self.created))
        state = cls.construct(self, args)
        self.created[address] = (cls, state)
        return address

    def set_result(self, value: bytes) -> None:
        self.result = value


# ---------------------------------------------------------------------------
# The ledger
# ---------------------------------------------------------------------------


class Ledger:
    """Single-writer ledger: submit transactions, read state, export, replay."""

    def __init__(self) -> None:
        self._contracts: dict[Address, _ContractRecord] = {}
        self._log: list[LogEntry] = []
        self._blocks: list[list[LogEntry]] = [[]]
        self._height = 0
        self._tx_counts: dict[bytes, int] = {}

    # -- block machinery ----------------------------------------------------

    @property
    def height(self) -> int:
        return self._height

    def advance_block(self, count: int = 1) -> int:
        """Append ``count`` empty blocks; returns the new height."""
        if count < 0:
            raise ValueError("cannot advance by a negative count")
        for _ in range(count):
            self._height += 1
            self._blocks.append([])
        return self._height

    @property
    def blocks(self) -> list[list[LogEntry]]:
        return [list(b) for b in self._blocks]

    @property
    def log(self) -> list[LogEntry]:
        return list(self._log)

    def transaction_count(self, caller: crypto.PublicKey | bytes) -> int:
        """How many transactions a key has landed on the chain (the stand-in
        for fees: rejected calls count too)."""
        raw = caller.to_bytes() if isinstance(caller, crypto.PublicKey) else caller
        return self._tx_counts.get(raw, 0)

    # -- submission ---------------------------------------------------------

    def deploy(self, caller: crypto.KeyPair, kind: str, init_args: bytes) -> Address:
        receipt = self.submit(make_transaction(caller, None, kind, init_args))
        return receipt.created[0]

    def call(self, caller: crypto.KeyPair, target: Address, function: str, args: bytes) -> CallReceipt:
        return self.submit(make_transaction(caller, target, function, args))

    def submit(self, tx: Transaction) -> CallReceipt:
        """Validate, execute, and log a pre-signed transaction.

        Raises BadSignature / UnknownAddress without touching the chain;
        contract-level rejections are logged and reported in the receipt
        (or raised as ConstructorRejected for deployments, after logging).
        """
        try:
            caller_key = crypto.PublicKey.from_bytes(tx.caller)
        except crypto.CryptoError as exc:
            raise BadSignature(str(exc)) from exc
        payload = signing_payload(tx.caller, tx.target, tx.function, tx.args)
        if not crypto.verify(caller_key, payload, tx.signature):
            raise BadSignature("transaction signature does not verify")
        if tx.target is not None and tx.target not in self._contracts:
            raise UnknownAddress(tx.target.hex)

        seq = len(self._log)
        tx = replace(tx, block=self._height)
        ctx = CallContext(self, tx, seq, tx.target)
        try:
            if tx.is_deploy():
                cls = CONTRACT_KINDS.get(tx.function)
                if cls is None:
                    raise ConstructorRejected(f"UnknownKind({tx.function})")
                address = derive_address(tx.caller, seq, 0)
                state = cls.construct(ctx, tx.args)
                ctx.created[address] = (cls, state)
                new_target_state = None
            else:
                record = self._contracts[tx.target]
                new_target_state = record.cls.apply(record.state, ctx, tx.function, tx.args)
        except (ContractRejected, ConstructorRejected) as exc:
            receipt = self._include(tx, seq, accepted=False, reason=exc.reason)
            if tx.is_deploy():
                raise
            return receipt

        receipt = self._include(tx, seq, accepted=True, reason=None,
                                result=ctx.result, created=tuple(ctx.created))
        for address, (contract_cls, state) in ctx.created.items():
            self._contracts[address] = _ContractRecord(
                kind=contract_cls.KIND, cls=contract_cls, state=state,
                history=[HistoryEntry(receipt.block, tx, state)],
            )
        if new_target_state is not None:
            self._commit(tx.target, new_target_state, tx, receipt.block)
        for address, state in ctx.staged.items():
            self._commit(address, state, tx, receipt.block)
        return receipt

    def _commit(self, address: Address, state: Any, tx: Transaction, block: int) -> None:
        record = self._contracts[address]
        record.state = state
        record.history.append(HistoryEntry(block, tx, state))

    def _include(self, tx: Transaction, seq: int, *, accepted: bool, reason: Optional[str],
                 result: Optional[bytes] = None, created: tuple[Address, ...] = ()) -> CallReceipt:
        entry = LogEntry(seq=seq, tx=tx, accepted=accepted, reason=reason)
        self._log.append(entry)
        self._blocks[self._height].append(entry)
        block = self._height
        self._tx_counts[tx.caller] = self._tx_counts.get(tx.caller, 0) + 1
        # one transaction per block: seal immediately
        self._height += 1
        self._blocks.append([])
        return CallReceipt(accepted=accepted, reason=reason, block=block, seq=seq,
                           result=result, created=created)

    # -- reading ------------------------------------------------------------

    def exists(self, address: Address) -> bool:
        return address in self._contracts

    def contract_kind(self, address: Address) -> str:
        return self._record(address).kind

    def read_state(self, address: Address) -> Any:
        """Current state of a contract; no key material required.  Treat the
        returned object as a snapshot and never mutate it."""
        return self._record(address).state

    def history(self, address: Address) -> list[HistoryEntry]:
        """Chronological state changes; the first entry is the deployment."""
        return list(self._record(address).history)

    def creation_block(self, address: Address) -> int:
        return self._record(address).history[0].block

    def addresses(self) -> list[Address]:
        return list(self._contracts)

    def contracts_by_kind(self, kind: str) -> list[Address]:
        return [a for a, rec in self._contracts.items() if rec.kind == kind]

    def _record(self, address: Address) -> _ContractRecord:
        record = self._contracts.get(address)
        if record is None:
            raise UnknownAddress(address.hex)
        return record

    def state_digest(self, address: Address) -> bytes:
        record = self._record(address)
        return crypto.digest(codec.pack(b"state", codec.text(record.kind),
                                        record.cls.encode_state(record.state)))

    def state_digests(self) -> dict[Address, bytes]:
        return {address: self.state_digest(address) for address in self._contracts}

    # -- export / replay ----------------------------------------------------

    def export(self) -> bytes:
        """Canonical byte-stable serialization of the full transaction log.

        Layout: magic, version, final height, transaction count, one record
        per transaction (block, status, deploy flag, caller, target,
        function, args, signature), then a footer of per-contract state
        digests for replay verification.
        """
        out = [EXPORT_MAGIC, codec.u16(EXPORT_VERSION), codec.u64(self._height),
               codec.u32(len(self._log))]
        for entry in self._log:
            tx = entry.tx
            out.append(codec.u64(tx.block))
            out.append(codec.u8(0 if entry.accepted else 1))
            out.append(codec.u8(1 if tx.is_deploy() else 0))
            out.append(codec.blob(tx.caller))
            out.append(codec.blob(b"" if tx.target is None else tx.target.digest))
            out.append(codec.blob(codec.text(tx.function)))
            out.append(codec.blob(tx.args))
            out.append(codec.blob(tx.signature))
        digests = self.state_digests()
        out.append(codec.u32(len(digests)))
        for address, d in digests.items():
            out.append(codec.blob(address.digest))
            out.append(codec.blob(d))
        return b"".join(out)

    @classmethod
    def replay(cls, data: bytes) -> "Ledger":
        """Re-execute an exported log from genesis and verify the outcome.

        Every transaction must reproduce its recorded accept/reject status
        and every contract its recorded state digest, else ReplayMismatch.
        """
        reader = codec.ByteReader(data)
        if reader.take(4) != EXPORT_MAGIC:
            raise ReplayMismatch("not a ledger export")
        version = reader.u16()
        if version != EXPORT_VERSION:
            raise ReplayMismatch(f"unsupported export version {version}")
        final_height = reader.u64()
        n_txs = reader.u32()

        ledger = cls()
        for i in range(n_txs):
            block = reader.u64()
            rejected = reader.u8()
            is_deploy = reader.u8()
            caller = reader.blob()
            target_raw = reader.blob()
            function = reader.blob().decode("utf-8")
            args = reader.blob()
            signature = reader.blob()
            target = None if is_deploy else Address(target_raw)
            if block < ledger.height:
                raise ReplayMismatch(f"transaction {i} block number out of order")
            ledger.advance_block(block - ledger.height)
            tx = Transaction(caller=caller, target=target, function=function,
                             args=args, signature=signature)
            try:
                receipt = ledger.submit(tx)
                accepted = receipt.accepted
            except ConstructorRejected:
                accepted = False
            except LedgerError as exc:
                raise ReplayMismatch(f"transaction {i} failed to re-execute: {exc}") from exc
            if accepted == bool(rejected):
                raise ReplayMismatch(f"transaction {i} outcome diverged on replay")

        if final_height < ledger.height:
            raise ReplayMismatch("recorded final height below replayed height")
        ledger.advance_block(final_height - ledger.height)

        n_contracts = reader.u32()
        replayed = ledger.state_digests()
        if n_contracts != len(replayed):
            raise ReplayMismatch("contract count diverged on replay")
        for _ in range(n_contracts):
            address = Address(reader.blob())
            recorded = reader.blob()
            if replayed.get(address) != recorded:
                raise ReplayMismatch(f"state digest diverged at {address.hex}")
        reader.expect_end()
        return ledger
