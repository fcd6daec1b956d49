"""Report assembly from customer disclosures.

Nothing in this module runs on-chain.  A reader (a prospective lender) holds
the customer's registered identity key and a disclosure bundle the customer
prepared, and walks the credit-account chain from the identity registry's
head pointer, verifying every step against ledger bytes.  Two disclosure
variants exist per account, and a bundle may mix them:

* ``KeyDisclosure`` hands over the account's shared private keys.  The
  reader decrypts the on-chain pointer and data fields directly.
* ``PlaintextDisclosure`` keeps the keys and hands over plaintexts together
  with the nonces used at encryption time.  The reader *re-encrypts* each
  disclosed value and compares against the ciphertext sitting on-chain;
  byte equality proves the disclosure honest without revealing any key.

Either way the reader ends up with the same facts, which is checked by the
test suite as variant equivalence.  A verified entry also gets its
commitment checked: the signature stored in the account must bind (account
address, disclosed institution identity, customer identity).  Failures are
loud — ChainMismatch for anything that contradicts chain bytes,
CommitmentInvalid for a commitment that does not verify, and
IncompleteDisclosure (carrying the partial report) when the chain keeps
going past the last disclosed account.  A customer can withhold *data* for
out-of-window accounts while still proving chain completeness; the window
check then only passes if every in-window account has its data open.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

from . import codec, crypto
from .credit_account import (
    CreditAccountContract,
    CreditAccountState,
    commitment_message,
    decode_data_payload,
    BlobStore,
)
from .identity import UnknownIdentity
from .ledger import Address, Ledger


class ChainMismatch(Exception):
    """A disclosed value does not match what the chain actually stores."""


class CommitmentInvalid(Exception):
    """The stored commitment does not verify under the disclosed identity."""

    def __init__(self, address: Address) -> None:
        super().__init__(address.hex)
        self.address = address


class IncompleteDisclosure(Exception):
    """The chain continues past the last disclosed account."""

    def __init__(self, report: "VerifiedReport") -> None:
        super().__init__(f"chain continues after {len(report.entries)} disclosed entries")
        self.report = report


# ---------------------------------------------------------------------------
# Bundle structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KeyDisclosure:
    """Share the account's shared private keys.  ``data_key`` may be withheld
    to keep the data field closed while still proving the chain link."""

    address: Address
    institution_identity: crypto.PublicKey
    pointer_key: crypto.PrivateKey
    data_key: Optional[crypto.PrivateKey] = None


@dataclass(frozen=True)
class PlaintextDisclosure:
    """Share plaintexts and nonces instead of keys.

    ``next_address``/``next_nonce`` describe this account's own next-pointer
    field (None at the chain terminal).  ``pointer_public_key`` is the shared
    pointer key of *this* account — the key under which the link pointing at
    this account was encrypted.  The nonce for that incoming link travels in
    the previous entry's ``next_nonce`` (or in the bundle's ``head_nonce``
    for the first account).
    """

    address: Address
    institution_identity: crypto.PublicKey
    pointer_public_key: crypto.PublicKey
    next_address: Optional[Address] = None
    next_nonce: Optional[bytes] = None
    data_plaintext: Optional[bytes] = None
    data_nonce: Optional[bytes] = None
    data_public_key: Optional[crypto.PublicKey] = None


DisclosureEntry = Union[KeyDisclosure, PlaintextDisclosure]


@dataclass(frozen=True)
class DisclosureBundle:
    identity: crypto.PublicKey
    entries: tuple[DisclosureEntry, ...]
    head_nonce: Optional[bytes] = None
    window: Optional[tuple[int, int]] = None


@dataclass(frozen=True)
class ReportEntry:
    address: Address
    creation_block: int
    expiration: int
    institution: crypto.PublicKey
    institution_trusted: bool
    commitment_ok: bool
    disclosed: bool
    data_mode: Optional[str] = None
    data: Optional[bytes] = None
    external_id: Optional[str] = None
    external_digest: Optional[bytes] = None


@dataclass(frozen=True)
class VerifiedReport:
    identity: crypto.PublicKey
    entries: tuple[ReportEntry, ...]
    complete: bool
    window: Optional[tuple[int, int]] = None
    window_satisfied: bool = True


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


def assemble_report(led: Ledger, registry: Address, bundle: DisclosureBundle,
                    trust_set: set[crypto.PublicKey],
                    blob_store: Optional[BlobStore] = None) -> VerifiedReport:
    """Walk the customer's chain, verify every disclosed fact, and report.

    The walk starts at the identity registry's encrypted head pointer and
    dereferences one verified link at a time; an undecryptable pointer is
    never followed, so a reader holding an empty bundle learns nothing but
    the head's existence.
    """
    registry_state = led.read_state(registry)
    identity_record = registry_state.records.get(bundle.identity.to_bytes())
    if identity_record is None:
        raise UnknownIdentity(bundle.identity.short_id())

    entries: list[ReportEntry] = []
    pending_ciphertext = identity_record.first_credit_account
    pending_nonce = bundle.head_nonce
    claimed_next: Optional[bytes] = None  # plaintext-variant claim to cross-check

    for index, entry in enumerate(bundle.entries):
        if pending_ciphertext is None:
            raise ChainMismatch(f"entry {index} lies beyond the chain terminal")
        address = entry.address
        if claimed_next is not None and claimed_next != address.digest:
            raise ChainMismatch(f"entry {index} does not match the previously claimed link")

        _verify_link(entry, index, pending_ciphertext, pending_nonce)

        if not led.exists(address) or led.contract_kind(address) != CreditAccountContract.KIND:
            raise ChainMismatch(f"entry {index} does not point at a credit account")
        state: CreditAccountState = led.read_state(address)

        commitment_ok = False
        if state.commitment is not None:
            message = commitment_message(address, entry.institution_identity, bundle.identity)
            if not crypto.verify(entry.institution_identity, message, state.commitment):
                raise CommitmentInvalid(address)
            commitment_ok = True

        disclosed, payload = _recover_payload(entry, index, state)
        entries.append(_build_entry(led, address, state, entry, commitment_ok,
                                    disclosed, payload, trust_set, blob_store))

        pending_ciphertext = state.next_account
        if isinstance(entry, PlaintextDisclosure):
            if entry.next_address is not None and pending_ciphertext is None:
                raise ChainMismatch(f"entry {index} claims a link the chain does not have")
            claimed_next = None if entry.next_address is None else entry.next_address.digest
            pending_nonce = entry.next_nonce
        else:
            claimed_next = None
            pending_nonce = None

    if pending_ciphertext is not None:
        partial = VerifiedReport(identity=bundle.identity, entries=tuple(entries),
                                 complete=False, window=bundle.window,
                                 window_satisfied=bundle.window is None)
        raise IncompleteDisclosure(partial)

    report = VerifiedReport(identity=bundle.identity, entries=tuple(entries),
                            complete=True, window=bundle.window)
    if bundle.window is not None:
        lo, hi = bundle.window
        report = VerifiedReport(identity=report.identity, entries=report.entries,
                                complete=True, window=bundle.window,
                                window_satisfied=check_window(report, lo, hi))
    return report


def _verify_link(entry: DisclosureEntry, index: int, ciphertext: bytes,
                 nonce: Optional[bytes]) -> None:
    """Prove that the pending encrypted pointer designates entry.address."""
    if isinstance(entry, KeyDisclosure):
        try:
            revealed = crypto.decrypt(entry.pointer_key, ciphertext)
        except crypto.WrongKey as exc:
            raise ChainMismatch(f"entry {index}: pointer key does not open the link") from exc
        if revealed != entry.address.digest:
            raise ChainMismatch(f"entry {index}: link points elsewhere")
        return
    if nonce is None:
        raise ChainMismatch(f"entry {index}: no nonce available to check the link")
    try:
        expected = crypto.encrypt(entry.pointer_public_key, nonce, entry.address.digest)
    except Exception as exc:  # malformed disclosed key material
        raise ChainMismatch(f"entry {index}: link re-encryption failed") from exc
    if expected != ciphertext:
        raise ChainMismatch(f"entry {index}: link re-encryption does not match the chain")


def _recover_payload(entry: DisclosureEntry, index: int,
                     state: CreditAccountState) -> tuple[bool, Optional[bytes]]:
    """(disclosed, payload bytes) for the account's data field.

    An account whose data field was never written counts as disclosed in
    every variant: the reader sees the absence directly, so there is nothing
    a withholding customer could be hiding.
    """
    if state.data is None:
        if isinstance(entry, PlaintextDisclosure) and entry.data_plaintext is not None:
            raise ChainMismatch(f"entry {index}: data disclosed but the account holds none")
        return True, None
    if isinstance(entry, KeyDisclosure):
        if entry.data_key is None:
            return False, None
        try:
            return True, crypto.decrypt(entry.data_key, state.data)
        except crypto.WrongKey as exc:
            raise ChainMismatch(f"entry {index}: data key does not open the data field") from exc
    if entry.data_plaintext is None:
        return False, None
    if entry.data_nonce is None or entry.data_public_key is None:
        raise ChainMismatch(f"entry {index}: data disclosure missing nonce or key")
    try:
        expected = crypto.encrypt(entry.data_public_key, entry.data_nonce, entry.data_plaintext)
    except Exception as exc:
        raise ChainMismatch(f"entry {index}: data re-encryption failed") from exc
    if expected != state.data:
        raise ChainMismatch(f"entry {index}: data re-encryption does not match the chain")
    return True, entry.data_plaintext


def _build_entry(led: Ledger, address: Address, state: CreditAccountState,
                 entry: DisclosureEntry, commitment_ok: bool, disclosed: bool,
                 payload: Optional[bytes], trust_set: set[crypto.PublicKey],
                 blob_store: Optional[BlobStore]) -> ReportEntry:
    data: Optional[bytes] = None
    data_mode: Optional[str] = None
    external_id: Optional[str] = None
    external_digest: Optional[bytes] = None
    if payload is not None:
        try:
            decoded = decode_data_payload(payload)
        except codec.DecodeError as exc:
            raise ChainMismatch(f"disclosed data for {address.short()} is not a protocol payload") from exc
        if state.data_mode != decoded.mode:
            raise ChainMismatch(f"data mode flag mismatch at {address.short()}")
        data_mode = decoded.mode
        if decoded.inline is not None:
            data = decoded.inline
        else:
            external_id = decoded.blob_id
            external_digest = decoded.content_digest
            if blob_store is not None and decoded.blob_id in blob_store:
                document = blob_store.get(decoded.blob_id)
                if crypto.digest(document) != decoded.content_digest:
                    raise ChainMismatch(f"external document digest mismatch at {address.short()}")
                data = document
    return ReportEntry(
        address=address,
        creation_block=led.creation_block(address),
        expiration=state.expiration,
        institution=entry.institution_identity,
        institution_trusted=entry.institution_identity in trust_set,
        commitment_ok=commitment_ok,
        disclosed=disclosed,
        data_mode=data_mode,
        data=data,
        external_id=external_id,
        external_digest=external_digest,
    )


def check_window(report: VerifiedReport, lo: int, hi: int) -> bool:
    """True iff every account created within [lo, hi] has open data.

    Vacuously true for an empty window.  An incomplete report can never
    certify a window — undisclosed chain suffix might hide in-window
    accounts.
    """
    if lo > hi:
        return True
    if not report.complete:
        return False
    return all(e.disclosed for e in report.entries if lo <= e.creation_block <= hi)


def render_report(report: VerifiedReport) -> list[str]:
    """One line per entry plus a summary: the CLI output format."""
    lines = []
    for e in report.entries:
        if not e.disclosed:
            shown = "undisclosed"
        elif e.data is not None:
            shown = e.data.decode("utf-8", errors="backslashreplace")
        elif e.external_digest is not None:
            shown = f"external:{e.external_id} digest={e.external_digest.hex()[:16]}"
        else:
            shown = "(empty)"
        lines.append(
            f"account={e.address.short()} created={e.creation_block} "
            f"expires={e.expiration} institution={e.institution.short_id()} "
            f"trusted={'yes' if e.institution_trusted else 'no'} "
            f"commitment={'ok' if e.commitment_ok else 'MISSING'} data={shown}"
        )
    window = "-" if report.window is None else f"[{report.window[0]},{report.window[1]}]"
    lines.append(
        f"complete={'yes' if report.complete else 'no'} entries={len(report.entries)} "
        f"window={window} window_satisfied={'yes' if report.window_satisfied else 'no'}"
    )
    return lines


# ---------------------------------------------------------------------------
# File round-trip (CLI bundle and trust files)
# ---------------------------------------------------------------------------


def _hex_or_none(value: Optional[bytes]) -> Optional[str]:
    return None if value is None else value.hex()


def _bytes_or_none(value: Optional[str]) -> Optional[bytes]:
    return None if value is None else bytes.fromhex(value)


def bundle_to_json(bundle: DisclosureBundle) -> str:
    entries = []
    for entry in bundle.entries:
        if isinstance(entry, KeyDisclosure):
            entries.append({
                "variant": "keys",
                "address": entry.address.hex,
                "institution_identity": entry.institution_identity.to_bytes().hex(),
                "pointer_key": entry.pointer_key.to_bytes().hex(),
                "data_key": None if entry.data_key is None else entry.data_key.to_bytes().hex(),
            })
        else:
            entries.append({
                "variant": "plaintext",
                "address": entry.address.hex,
                "institution_identity": entry.institution_identity.to_bytes().hex(),
                "pointer_public_key": entry.pointer_public_key.to_bytes().hex(),
                "next_address": None if entry.next_address is None else entry.next_address.hex,
                "next_nonce": _hex_or_none(entry.next_nonce),
                "data_plaintext": _hex_or_none(entry.data_plaintext),
                "data_nonce": _hex_or_none(entry.data_nonce),
                "data_public_key": None if entry.data_public_key is None
                                   else entry.data_public_key.to_bytes().hex(),
            })
    doc = {
        "identity": bundle.identity.to_bytes().hex(),
        "head_nonce": _hex_or_none(bundle.head_nonce),
        "window": None if bundle.window is None else list(bundle.window),
        "entries": entries,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def bundle_from_json(text: str) -> DisclosureBundle:
    doc = json.loads(text)
    entries: list[DisclosureEntry] = []
    for raw in doc["entries"]:
        if raw["variant"] == "keys":
            entries.append(KeyDisclosure(
                address=Address(bytes.fromhex(raw["address"])),
                institution_identity=crypto.PublicKey.from_bytes(
                    bytes.fromhex(raw["institution_identity"])),
                pointer_key=crypto.PrivateKey.from_bytes(bytes.fromhex(raw["pointer_key"])),
                data_key=None if raw.get("data_key") is None
                         else crypto.PrivateKey.from_bytes(bytes.fromhex(raw["data_key"])),
            ))
        elif raw["variant"] == "plaintext":
            next_address = raw.get("next_address")
            data_public = raw.get("data_public_key")
            entries.append(PlaintextDisclosure(
                address=Address(bytes.fromhex(raw["address"])),
                institution_identity=crypto.PublicKey.from_bytes(
                    bytes.fromhex(raw["institution_identity"])),
                pointer_public_key=crypto.PublicKey.from_bytes(
                    bytes.fromhex(raw["pointer_public_key"])),
                next_address=None if next_address is None else Address(bytes.fromhex(next_address)),
                next_nonce=_bytes_or_none(raw.get("next_nonce")),
                data_plaintext=_bytes_or_none(raw.get("data_plaintext")),
                data_nonce=_bytes_or_none(raw.get("data_nonce")),
                data_public_key=None if data_public is None
                                else crypto.PublicKey.from_bytes(bytes.fromhex(data_public)),
            ))
        else:
            raise ValueError(f"unknown disclosure variant {raw['variant']!r}")
    window = doc.get("window")
    return DisclosureBundle(
        identity=crypto.PublicKey.from_bytes(bytes.fromhex(doc["identity"])),
        entries=tuple(entries),
        head_nonce=_bytes_or_none(doc.get("head_nonce")),
        window=None if window is None else (int(window[0]), int(window[1])),
    )


def trust_to_json(trust_set: set[crypto.PublicKey]) -> str:
    return json.dumps(sorted(k.to_bytes().hex() for k in trust_set), indent=2)


def trust_from_json(text: str) -> set[crypto.PublicKey]:
    return {crypto.PublicKey.from_bytes(bytes.fromhex(h)) for h in json.loads(text)}
