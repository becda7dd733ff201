"""The malicious-extension adversary's view of the world.

An attack program receives an :class:`AdversaryContext` and nothing else. It
can read and rewrite traffic of the victim's browser, read its cookie jar, pick
which authenticator the browser talks to, open frames, and talk to RPs the way
any web client can. It never receives the victim's enclave or authenticator;
asking for anything outside the allowlist raises ``ConfinementError``.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import TYPE_CHECKING

from ..core import EntityId, EntityKind
from ..envelope import MessageEnvelope, MsgType, decode_body
from ..errors import ConfinementError, FidoSimError
from ..fido2.authenticator import Authenticator
from ..fido2.messages import AuthRequest, RegistrationRequest
from ..fido2.relying_party import AuthEvidence, RelyingParty
from ..network import InterceptorHook

if TYPE_CHECKING:
    from ..harness.world import Host, World

__all__ = ["AdversaryContext", "InterceptorHook", "RpView", "DeviceView"]


class _Confined:
    __slots__ = ()

    def __getattr__(self, name: str):
        if name.startswith("__"):
            raise AttributeError(name)  # keep dir(), copy and pickle working
        raise ConfinementError(f"{type(self).__name__} exposes no {name!r}")


class RpView(_Confined):
    """What a web client can ask of a relying party."""

    __slots__ = ("_rp", "_ctx")

    def __init__(self, rp: RelyingParty, ctx: AdversaryContext):
        self._rp = rp
        self._ctx = ctx

    @property
    def id(self) -> EntityId:
        return self._rp.id

    @property
    def origin(self) -> str:
        return self._rp.origin

    @property
    def rp_id(self) -> str:
        return self._rp.rp_id

    def _attempt(self, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except FidoSimError as exc:
            self._rp.events.reject(self._rp.id, type(exc).__name__, str(exc))
            self._ctx.failures.append(type(exc).__name__)
            return None

    def begin_registration(
        self, username: str, client: EntityId, evidence: AuthEvidence | None = None
    ) -> MessageEnvelope | None:
        env = self._attempt(self._rp.begin_registration, username, client, evidence)
        if env is not None:
            self._ctx.initiated.add(self._ctx.challenge_of(env))
        return env

    def begin_authentication(self, username: str, client: EntityId, **kw) -> MessageEnvelope | None:
        env = self._attempt(self._rp.begin_authentication, username, client, **kw)
        if env is not None:
            self._ctx.initiated.add(self._ctx.challenge_of(env))
        return env

    def accept_cookie(self, username: str, value: bytes, client: EntityId) -> bytes | None:
        token = self._attempt(
            self._rp.accept_cookie, username, value, self._ctx.knows_password, client
        )
        if token is not None:
            self._ctx.loot.append(token)
        return token


class DeviceView(_Confined):
    """The adversary's own computer and security key."""

    __slots__ = ("_host", "_world")

    def __init__(self, host: Host, world: World):
        self._host = host
        self._world = world

    @property
    def client_id(self) -> EntityId:
        return self._host.client.id

    @property
    def hsk(self) -> Authenticator:
        return self._host.hsk

    @property
    def has_tee(self) -> bool:
        return self._host.verifier is not None

    def use_hsk(self, hsk: Authenticator) -> None:
        """Plug a different key (say, a clone) into this machine."""
        self._world.add_device(hsk)
        self._host.hsk = hsk
        self._host.client.hsk = hsk.id

    def register(self, rp: RpView, username: str, evidence: AuthEvidence | None = None):
        return self._world.register(self._host, rp._rp, username, evidence=evidence, react=False)

    def login(self, rp: RpView, username: str, **kw):
        return self._world.login(self._host, rp._rp, username, react=False, **kw)


class _Agent:
    """Network presence of the adversary, used only to act once traffic settles."""

    def __init__(self) -> None:
        self.id = EntityId(EntityKind.ADVERSARY, "A1")
        self.tasks: list[Callable[[], list[MessageEnvelope]]] = []

    def receive(self, env: MessageEnvelope) -> list[MessageEnvelope]:
        return []

    def on_idle(self) -> list[MessageEnvelope]:
        tasks, self.tasks = self.tasks, []
        return [env for task in tasks for env in task()]


class AdversaryContext(_Confined):
    __slots__ = (
        "_world", "_victim", "_device", "_agent", "username", "knows_password",
        "loot", "initiated", "failures", "captured", "hooks",
    )

    def __init__(self, world: World, victim: Host, device: Host, username: str, *, knows_password: bool = True):
        self._world = world
        self._victim = victim
        self._device = device
        self.username = username
        self.knows_password = knows_password
        self.loot: list[bytes] = []
        self.initiated: set[bytes] = set()
        self.failures: list[str] = []
        self.captured: dict[str, object] = {}
        self.hooks: list[InterceptorHook] = []
        self._agent = _Agent()
        world.network.attach(self._agent)

    # -- identities ------------------------------------------------------------

    @property
    def victim_client(self) -> EntityId:
        return self._victim.client.id

    @property
    def victim_hsk(self) -> EntityId:
        return self._victim.hsk.id

    @property
    def device(self) -> DeviceView:
        return DeviceView(self._device, self._world)

    def rp(self, rp_id: str) -> RpView:
        return RpView(self._world.rps[rp_id], self)

    @staticmethod
    def challenge_of(env: MessageEnvelope) -> bytes:
        cls = RegistrationRequest if env.msg_type is MsgType.REG_REQUEST else AuthRequest
        return decode_body(cls, env.payload).challenge

    # -- traffic ---------------------------------------------------------------

    def touches_victim(self, env: MessageEnvelope) -> bool:
        return self.victim_client in (env.sender, env.receiver)

    def install(
        self,
        match: Callable[[MessageEnvelope], bool],
        transform: Callable[[MessageEnvelope], list[MessageEnvelope]],
        name: str = "hook",
    ) -> InterceptorHook:
        """Intercept the victim browser's traffic; other links are out of reach."""
        hook = InterceptorHook(lambda env: self.touches_victim(env) and match(env), transform, name)
        self.hooks.append(hook)
        self._world.network.install(hook)
        return hook

    def send(self, env: MessageEnvelope | None) -> None:
        """Put an adversary-made envelope on the wire as is."""
        if env is not None:
            self._world.network.inject(env)

    def release(self, env: MessageEnvelope | None) -> None:
        """Let an honest party's envelope travel normally, hooks included."""
        if env is not None:
            self._world.network.send(env)

    def when_idle(self, task: Callable[[], list[MessageEnvelope]]) -> None:
        """Run ``task`` once nothing is in flight; its envelopes go through the hooks."""
        self._agent.tasks.append(task)

    def run(self) -> None:
        self._world.network.run()

    # -- the victim's browser --------------------------------------------------

    def victim_cookie(self, origin: str, kind: str) -> bytes | None:
        return self._victim.client.jar.get(origin, kind)

    def redirect_victim_hsk(self, hsk: EntityId | None = None) -> None:
        """Point the victim's browser at another authenticator (None restores it)."""
        self._victim.client.hsk = hsk if hsk is not None else self._victim.hsk.id

    def plug_into_victim_host(self, hsk: Authenticator) -> None:
        """Pair an adversary key with the victim host as any USB key would be."""
        self._world.pair_hsk(self._victim.verifier, hsk)

    def open_iframe(self, rp_id: str, *, allow_attribute: bool, permissions_header: bool) -> None:
        rp = self._world.rps[rp_id]
        self._victim.client.open_iframe(
            rp.id, rp.origin, allow_attribute=allow_attribute, permissions_header=permissions_header
        )

    def note(self, code: str, detail: str = "") -> None:
        self._world.events.note(self._agent.id, code, detail)
