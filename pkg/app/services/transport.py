"""模拟网络与视图记录

三方之间是无差错的双向信道，消息按程序顺序投递。每条消息在发送时
按单位计费：下标 ⌈log2 n⌉ 位、X/Y 符号 ⌈log2 |X|⌉ / ⌈log2 |Y|⌉ 位、
域元素 ⌈log2 p⌉ 位，载荷按固定位宽打包。

参与方只能通过 Network 交换数据，其视图由网络与自身的随机抽取构成。
"""
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Deque, Dict, Iterable, List, Optional, Tuple

from loguru import logger

from app.core.exceptions import ProtocolException
from app.services.field import ceil_log2
from app.services.randomness import RandomSource


class PartyId(str, Enum):
    ALICE = "alice"
    BOB = "bob"
    CHARLIE = "charlie"


class Unit(str, Enum):
    """消息计费单位"""

    INDEX = "index"
    X_SYMBOL = "x_symbol"
    Y_SYMBOL = "y_symbol"
    FIELD = "field"


def pack_values(values: Iterable[int], width: int) -> bytes:
    """按固定位宽大端打包"""
    values = list(values)
    accumulator = 0
    for value in values:
        accumulator = (accumulator << width) | value
    total_bits = width * len(values)
    return accumulator.to_bytes((total_bits + 7) // 8, "big")


@dataclass(frozen=True)
class Message:
    sender: PartyId
    receiver: PartyId
    round: int
    tag: str
    unit: Unit
    values: Tuple[int, ...]
    width: int

    @property
    def bit_cost(self) -> int:
        return self.width * len(self.values)

    @property
    def payload(self) -> bytes:
        return pack_values(self.values, self.width)

    def transcript_line(self) -> str:
        payload = self.payload.hex() or "-"
        return f"{self.round} {self.sender.value}→{self.receiver.value} {self.tag} {self.bit_cost} {payload}"


@dataclass
class View:
    """参与方视图：本地随机性、收发的全部消息，Charlie 另有输出"""

    party: PartyId
    local_randomness: List[Tuple[str, int]] = field(default_factory=list)
    messages_sent: List[Message] = field(default_factory=list)
    messages_received: List[Message] = field(default_factory=list)
    output: Optional[Fraction] = None

    def serialize(self) -> str:
        """规范序列化（单射），隐私审计以此为分布的键"""
        lines = [f"party {self.party.value}"]
        lines.extend(f"rand {label} {value}" for label, value in self.local_randomness)
        for kind, messages in (("sent", self.messages_sent), ("recv", self.messages_received)):
            for message in messages:
                joined = ",".join(str(v) for v in message.values)
                lines.append(
                    f"{kind} {message.round} {message.sender.value}→{message.receiver.value} "
                    f"{message.tag} [{joined}]"
                )
        if self.output is not None:
            lines.append(f"output {self.output}")
        return "\n".join(lines)


class BitMeter:
    """按单位计费并按信道累计"""

    def __init__(self, n: int, x_size: int, y_size: int, modulus: int):
        self.widths: Dict[Unit, int] = {
            Unit.INDEX: ceil_log2(n),
            Unit.X_SYMBOL: ceil_log2(x_size),
            Unit.Y_SYMBOL: ceil_log2(y_size),
            Unit.FIELD: ceil_log2(modulus),
        }
        self.bounds: Dict[Unit, int] = {
            Unit.INDEX: n,
            Unit.X_SYMBOL: x_size,
            Unit.Y_SYMBOL: y_size,
            Unit.FIELD: modulus,
        }
        self.by_channel: Dict[Tuple[PartyId, PartyId], int] = defaultdict(int)
        self.by_unit: Dict[Unit, int] = defaultdict(int)
        self.total = 0

    def width(self, unit: Unit) -> int:
        return self.widths[unit]

    def charge(self, message: Message) -> None:
        self.by_channel[(message.sender, message.receiver)] += message.bit_cost
        self.by_unit[message.unit] += message.bit_cost
        self.total += message.bit_cost


class Network:
    """三方之间的同步模拟网络"""

    def __init__(self, meter: BitMeter):
        self.meter = meter
        self.round = 0
        self.messages: List[Message] = []
        self.views: Dict[PartyId, View] = {party: View(party) for party in PartyId}
        self._inboxes: Dict[Tuple[PartyId, str], Deque[Message]] = defaultdict(deque)

    def next_round(self) -> None:
        self.round += 1

    def send(self, sender: PartyId, receiver: PartyId, tag: str, unit: Unit, values: Iterable[int]) -> Message:
        if sender == receiver:
            raise ProtocolException("network", f"{sender.value} cannot send to itself")
        values = tuple(int(v) for v in values)
        bound = self.meter.bounds[unit]
        for value in values:
            if not 0 <= value < bound:
                raise ProtocolException(
                    "network", f"value {value} does not fit unit {unit.value} (bound {bound})", {"tag": tag}
                )
        message = Message(sender, receiver, self.round, tag, unit, values, self.meter.width(unit))
        self.meter.charge(message)
        self.messages.append(message)
        self.views[sender].messages_sent.append(message)
        self.views[receiver].messages_received.append(message)
        self._inboxes[(receiver, tag)].append(message)
        logger.debug(f"round {self.round}: {sender.value}→{receiver.value} {tag} {message.bit_cost} bits")
        return message

    def receive(self, receiver: PartyId, tag: str) -> Tuple[int, ...]:
        inbox = self._inboxes.get((receiver, tag))
        if not inbox:
            raise ProtocolException("network", f"{receiver.value} has no pending '{tag}' message")
        return inbox.popleft().values


class _LabeledStream:
    """把参与方的抽取适配成 RandomSource，并在视图中记录标签"""

    def __init__(self, runtime: "PartyRuntime", label: str):
        self._runtime = runtime
        self._label = label
        self._count = 0

    def randbelow(self, bound: int) -> int:
        value = self._runtime.draw(bound, f"{self._label}[{self._count}]")
        self._count += 1
        return value


class PartyRuntime:
    """单个参与方：持有随机源，只经网络收发"""

    def __init__(self, party: PartyId, network: Network, source: RandomSource):
        self.party = party
        self.network = network
        self._source = source

    @property
    def view(self) -> View:
        return self.network.views[self.party]

    def draw(self, bound: int, label: str) -> int:
        value = self._source.randbelow(bound)
        self.view.local_randomness.append((label, value))
        return value

    def stream(self, label: str) -> RandomSource:
        return _LabeledStream(self, label)

    def send(self, receiver: PartyId, tag: str, unit: Unit, values: Iterable[int]) -> Message:
        return self.network.send(self.party, receiver, tag, unit, values)

    def receive(self, tag: str) -> Tuple[int, ...]:
        return self.network.receive(self.party, tag)


def dump_transcript(messages: Iterable[Message], views: Dict[PartyId, View]) -> str:
    """行格式转储：`round from→to tag bits hex`，末尾附各方本地随机性"""
    lines = [message.transcript_line() for message in messages]
    lines.append("# randomness")
    for party in PartyId:
        for label, value in views[party].local_randomness:
            lines.append(f"{party.value} {label} {value}")
    return "\n".join(lines) + "\n"
