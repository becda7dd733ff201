"""Attack programs for the in-browser adversary.

Each ``a1_*`` function installs interception hooks through an
:class:`AdversaryContext` (and, for some, issues requests of its own). The
programs only see and rewrite envelopes; whether anything they do survives is
decided by the honest parties.
"""

from __future__ import annotations

import enum

from .. import core
from ..core import SigAlg
from ..envelope import MessageEnvelope, MsgType, decode_body, encode_body
from ..fido2.messages import (
    AssertionResponse,
    AttestationResponse,
    AuthRequest,
    CtapRegistrationRequest,
    Notice,
    RegistrationRequest,
    RequestType,
    assertion_data,
    client_data_hash,
)
from ..fido2.relying_party import AuthEvidence
from .interceptor import AdversaryContext


class AttackId(enum.Enum):
    MISBIND = "MISBIND"
    DOUBLEBIND_REG = "DOUBLEBIND_REG"
    DOUBLEBIND_SESSION = "DOUBLEBIND_SESSION"
    SYNC_LOGIN = "SYNC_LOGIN"
    MITM_TRANSPLANT = "MITM_TRANSPLANT"
    SIG_DOWNGRADE = "SIG_DOWNGRADE"
    COOKIE_STEAL = "COOKIE_STEAL"
    CLONE_STEALTH = "CLONE_STEALTH"


def _is(msg_type: MsgType, *, to_victim: bool | None = None, ctx: AdversaryContext | None = None):
    def match(env: MessageEnvelope) -> bool:
        if env.msg_type is not msg_type:
            return False
        if to_victim is None:
            return True
        return (env.receiver == ctx.victim_client) is to_victim

    return match


def _once(ctx: AdversaryContext, key: str) -> bool:
    if ctx.captured.get(key):
        return False
    ctx.captured[key] = True
    return True


def _adversary_attestation(ctx: AdversaryContext, inner: RegistrationRequest, origin: str) -> bytes:
    resp = ctx.device.hsk.handle_registration(CtapRegistrationRequest(inner, origin), True)
    return encode_body(resp)


# -- misbinding ------------------------------------------------------------------


def a1_misbind(ctx: AdversaryContext, rp_id: str, *, cuckoo: bool = False) -> None:
    """Swap the victim's attestation for one from the adversary's key.

    With ``cuckoo`` the victim's response is simply discarded; the adversary
    then registers from its own host (see the scenario script).
    """
    origin = ctx.rp(rp_id).origin

    def remember_request(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.origin == origin:
            ctx.captured["misbind_request"] = decode_body(RegistrationRequest, env.payload)
        return [env]

    def swap_response(env: MessageEnvelope) -> list[MessageEnvelope]:
        inner = ctx.captured.get("misbind_request")
        if inner is None or env.origin != origin or not _once(ctx, "misbind_done"):
            return [env]
        if cuckoo:
            ctx.note("DROP_VICTIM_ATTESTATION", rp_id)
            return []
        ctx.note("SWAP_ATTESTATION", rp_id)
        return [env.replace(payload=_adversary_attestation(ctx, inner, env.origin))]

    ctx.install(_is(MsgType.REG_REQUEST, to_victim=True, ctx=ctx), remember_request, "misbind-capture")
    ctx.install(_is(MsgType.REG_RESPONSE, to_victim=True, ctx=ctx), swap_response, "misbind-swap")


# -- double binding --------------------------------------------------------------


def a1_doublebind_reg(ctx: AdversaryContext, rp_id: str) -> None:
    """Let the adversary's key answer the victim's registration, then ask for the victim's.

    The browser is pointed at the adversary's key for the first request. Once
    that response is on its way to the RP, a second registration is started in
    the background and reaches the victim's own key, so the victim still sees
    one successful enrolment.
    """
    rp = ctx.rp(rp_id)
    ctx.plug_into_victim_host(ctx.device.hsk)

    def redirect(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.origin == rp.origin and _once(ctx, "doublebind_redirect"):
            ctx.redirect_victim_hsk(ctx.device.hsk.id)
        return [env]

    def background_request() -> list[MessageEnvelope]:
        second = rp.begin_registration(ctx.username, ctx.victim_client, AuthEvidence(password_ok=ctx.knows_password))
        return [] if second is None else [second]

    def chain_second(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.origin == rp.origin and _once(ctx, "doublebind_second"):
            ctx.redirect_victim_hsk(None)
            ctx.when_idle(background_request)
        return [env]

    ctx.install(_is(MsgType.REG_REQUEST, to_victim=True, ctx=ctx), redirect, "doublebind-redirect")
    ctx.install(_is(MsgType.REG_RESPONSE, to_victim=False, ctx=ctx), chain_second, "doublebind-second")


def a1_doublebind_session(ctx: AdversaryContext, rp_id: str) -> bool:
    """From inside the victim's session, enrol the adversary's key in the background.

    Returns whether the RP issued a registration request at all.
    """
    rp = ctx.rp(rp_id)

    def answer(env: MessageEnvelope) -> list[MessageEnvelope]:
        inner = decode_body(RegistrationRequest, env.payload)
        if inner.challenge not in ctx.initiated:
            return [env]
        payload = _adversary_attestation(ctx, inner, env.origin)
        ctx.note("BACKGROUND_REGISTRATION", rp_id)
        return [MessageEnvelope(MsgType.REG_RESPONSE, ctx.victim_client, rp.id, env.origin, payload)]

    ctx.install(_is(MsgType.REG_REQUEST, to_victim=True, ctx=ctx), answer, "doublebind-session")
    env = rp.begin_registration(ctx.username, ctx.victim_client, AuthEvidence(password_ok=ctx.knows_password))
    if env is None:
        return False
    ctx.release(env)
    ctx.run()
    return True


# -- synchronized login ----------------------------------------------------------


def a1_sync_login(
    ctx: AdversaryContext,
    rp_id: str,
    second_rp_id: str,
    *,
    allow_attribute: bool = True,
    permissions_header: bool = True,
) -> None:
    """Piggyback a login to ``second_rp_id`` on the victim's login to ``rp_id``.

    An invisible frame for the second RP asks for an assertion just before the
    victim's own request reaches the key; a negligent user taps twice.
    """
    first, second = ctx.rp(rp_id), ctx.rp(second_rp_id)
    ctx.open_iframe(second_rp_id, allow_attribute=allow_attribute, permissions_header=permissions_header)

    def piggyback(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.sender != first.id or not _once(ctx, "sync_injected"):
            return [env]
        extra = second.begin_authentication(ctx.username, ctx.victim_client, password_ok=ctx.knows_password)
        return [env] if extra is None else [extra, env]

    def steal_session(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.sender != second.id:
            return [env]
        notice = decode_body(Notice, env.payload)
        if notice.kind == "session":
            ctx.loot.append(bytes(notice.token))
            ctx.note("SESSION_STOLEN", second_rp_id)
            return []
        return [env]

    ctx.install(_is(MsgType.AUTH_REQUEST, to_victim=True, ctx=ctx), piggyback, "sync-inject")
    ctx.install(_is(MsgType.NOTIFY, to_victim=True, ctx=ctx), steal_session, "sync-loot")


# -- request transplant ----------------------------------------------------------


def a1_mitm_transplant(ctx: AdversaryContext, rp_id: str) -> None:
    """Make the victim's key answer a challenge the adversary's own session received."""
    rp = ctx.rp(rp_id)
    device = ctx.device

    def transplant(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.sender != rp.id or not _once(ctx, "transplant_request"):
            return [env]
        theirs = rp.begin_authentication(ctx.username, device.client_id, password_ok=ctx.knows_password)
        if theirs is None:
            return [env]
        ctx.captured["transplant_challenge"] = ctx.challenge_of(theirs)
        return [env.replace(payload=theirs.payload)]

    def exfiltrate(env: MessageEnvelope) -> list[MessageEnvelope]:
        challenge = ctx.captured.get("transplant_challenge")
        if challenge is None or env.receiver != rp.id:
            return [env]
        resp = decode_body(AssertionResponse, env.payload)
        if resp.client_data_hash != client_data_hash(RequestType.GET, challenge, rp.origin):
            return [env]
        ctx.note("ASSERTION_EXFILTRATED", rp_id)
        return [env.replace(sender=device.client_id, mac=None)]

    ctx.install(_is(MsgType.AUTH_REQUEST, to_victim=True, ctx=ctx), transplant, "transplant-request")
    ctx.install(_is(MsgType.AUTH_RESPONSE, to_victim=False, ctx=ctx), exfiltrate, "transplant-response")


# -- algorithm downgrade ---------------------------------------------------------


def a1_downgrade(ctx: AdversaryContext, rp_id: str) -> None:
    """Strip every algorithm but WEAK_TOY from the victim's registration request."""
    origin = ctx.rp(rp_id).origin

    def prune(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.origin != origin:
            return [env]
        req = decode_body(RegistrationRequest, env.payload)
        if SigAlg.WEAK_TOY not in req.alg_list:
            return [env]
        ctx.captured["downgrade_challenge"] = req.challenge
        if req.alg_list == [SigAlg.WEAK_TOY]:
            return [env]
        pruned = RegistrationRequest(
            req.challenge, req.rp_id, req.rp_name, req.username, [SigAlg.WEAK_TOY],
            req.requires_user_presence, req.is_first_authenticator,
        )
        ctx.note("ALG_LIST_PRUNED", rp_id)
        return [env.replace(payload=encode_body(pruned))]

    def harvest(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.origin == origin:
            resp = decode_body(AttestationResponse, env.payload)
            if resp.alg is SigAlg.WEAK_TOY:
                ctx.captured["downgrade_credential"] = (bytes(resp.credential_id), bytes(resp.public_key))
        return [env]

    ctx.install(_is(MsgType.REG_REQUEST, to_victim=True, ctx=ctx), prune, "downgrade-prune")
    ctx.install(_is(MsgType.REG_RESPONSE, to_victim=False, ctx=ctx), harvest, "downgrade-harvest")


def forge_login(ctx: AdversaryContext, rp_id: str, counter: int = 1 << 20) -> bool:
    """Log in from the adversary's device with an assertion forged from the public key."""
    stolen = ctx.captured.get("downgrade_credential")
    if stolen is None:
        return False
    cred_id, public = stolen
    rp = ctx.rp(rp_id)
    device = ctx.device
    env = rp.begin_authentication(ctx.username, device.client_id, password_ok=ctx.knows_password)
    if env is None:
        return False
    req = decode_body(AuthRequest, env.payload)
    rp_id_hash = core.hash(req.rp_id.encode())
    cdh = client_data_hash(RequestType.GET, req.challenge, rp.origin)
    # the key's slot still holds the registration challenge unless the victim logged in since
    stored = core.hash(ctx.captured["downgrade_challenge"])
    sig = core.forge_weak(public, assertion_data(rp_id_hash, counter, cdh, stored))
    forged = AssertionResponse(cred_id, counter, sig, cdh, rp_id_hash, stored)
    ctx.note("ASSERTION_FORGED", rp_id)
    ctx.send(MessageEnvelope(MsgType.AUTH_RESPONSE, device.client_id, rp.id, rp.origin, encode_body(forged)))
    ctx.run()
    return True


# -- remember-this-device --------------------------------------------------------


def a1_record_transcripts(ctx: AdversaryContext, rp_id: str) -> None:
    """Keep a copy of every assertion the victim's browser sends to ``rp_id``."""
    rp = ctx.rp(rp_id)

    def record(env: MessageEnvelope) -> list[MessageEnvelope]:
        if env.receiver == rp.id:
            ctx.captured.setdefault("transcripts", []).append(env)
        return [env]

    ctx.install(_is(MsgType.AUTH_RESPONSE, to_victim=False, ctx=ctx), record, "record")


def a1_cookie_steal(ctx: AdversaryContext, rp_id: str) -> bool:
    """Copy the remember-device cookie out of the victim's jar and use it elsewhere.

    Without a cookie, fall back to replaying recorded assertions against a
    fresh login from the adversary's device. Returns whether a session came of it.
    """
    rp = ctx.rp(rp_id)
    device = ctx.device
    cookie = ctx.victim_cookie(rp.origin, "remember")
    if cookie is not None:
        ctx.note("COOKIE_COPIED", rp_id)
        return attacker_import_cookie(ctx, rp_id, cookie)
    before = len(ctx.loot)
    for recorded in ctx.captured.get("transcripts", []):
        if rp.begin_authentication(ctx.username, device.client_id, password_ok=ctx.knows_password) is None:
            break
        ctx.note("TRANSCRIPT_REPLAYED", rp_id)
        ctx.send(recorded.replace(sender=device.client_id, mac=None))
        ctx.run()
    return len(ctx.loot) > before


def attacker_import_cookie(ctx: AdversaryContext, rp_id: str, cookie: bytes) -> bool:
    rp = ctx.rp(rp_id)
    return rp.accept_cookie(ctx.username, cookie, ctx.device.client_id) is not None
