"""三方协议引擎

Alice 持有 x^n，Bob 持有 y^n，Charlie 输出 F̂_n。三个协议共用同一骨架：
Alice 抽取下标集 I 并发给 Bob，之后各协议只在 I 上的位置计算。

- OneTimePadProtocol: 移位一次一密 + Charlie 生成的加法份额 + 盐值 Z
- PolyLProtocol: 指示函数的一次多项式分享，Charlie 插值得到 m·F̂_n
- PolyDirectProtocol: 按 f1 的双线性乘积形式分享因子，一层乘法

所有随机性经 RandomnessProvider 抽取，因而可由种子复现，也可被审计器
替换为穷举纸带。
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Type

from loguru import logger

from app.core.exceptions import FieldArithmeticException, ProtocolException, ValidationException
from app.services.field import (
    SHAMIR_ABSCISSAE,
    FieldElement,
    PrimeField,
    ceil_log2,
    decode_centered,
    encode_rational,
    interpolate_at_zero,
    min_field_size,
)
from app.services.funcspec import Cell, FunctionTable, ProductForm, to_field
from app.services.randomness import RandomnessProvider, SeededProvider
from app.services.sampling import IndexSet, estimate_function, sample_indices
from app.services.sharing import ENCRYPT, PadSymbol, additive_split, degree1_share, draw_pad, pad_shift
from app.services.transport import (
    BitMeter,
    Message,
    Network,
    PartyId,
    PartyRuntime,
    Unit,
    View,
    dump_transcript,
)

ALICE, BOB, CHARLIE = PartyId.ALICE, PartyId.BOB, PartyId.CHARLIE


@dataclass
class ProtocolResult:
    """一次协议运行的结果"""

    protocol_id: str
    estimate: Fraction
    views: Dict[PartyId, View]
    messages: List[Message]
    n: int
    m: int
    modulus: int
    seed: Optional[int]
    index_set: IndexSet
    bits_by_channel: Dict[Tuple[PartyId, PartyId], int]
    rerandomize: bool = False

    @property
    def total_bits(self) -> int:
        return sum(message.bit_cost for message in self.messages)

    @property
    def index_bits(self) -> int:
        return sum(message.bit_cost for message in self.messages if message.unit == Unit.INDEX)

    @property
    def extra_bits(self) -> int:
        return self.total_bits - self.index_bits

    @property
    def rate(self) -> Fraction:
        return Fraction(self.total_bits, self.n)

    def dump_transcript(self) -> str:
        return dump_transcript(self.messages, self.views)


def distribute_index_set(index_set: IndexSet, network: Network) -> IndexSet:
    """Alice 把升序下标集发给 Bob，每个下标 ⌈log2 n⌉ 位（零起始编码）"""
    network.send(ALICE, BOB, "I", Unit.INDEX, (i - 1 for i in index_set))
    received = network.receive(BOB, "I")
    return IndexSet(tuple(i + 1 for i in received), index_set.n)


class Protocol:
    """协议基类：输入校验、域选择、下标分发与结果校验"""

    protocol_id = "base"
    min_modulus = 3

    def __init__(
        self,
        f1: FunctionTable,
        x_seq: Sequence[str],
        y_seq: Sequence[str],
        m: int,
        *,
        seed: Optional[int] = None,
        randomness: Optional[RandomnessProvider] = None,
        field: Optional[PrimeField] = None,
        index_set: Optional[IndexSet] = None,
        verify: bool = True,
    ):
        f1.validate_sequences(x_seq, y_seq)
        n = len(x_seq)
        if not 1 <= m <= n:
            raise ValidationException("m", f"sample size must satisfy 1 <= m <= n, got m={m}, n={n}")
        if randomness is None:
            if seed is None:
                raise ValidationException("seed", "a seed is required when no randomness provider is given")
            randomness = SeededProvider(seed)
        if index_set is not None and (index_set.n != n or index_set.m != m):
            raise ValidationException("index_set", f"fixed index set has n={index_set.n}, m={index_set.m}")

        self.f1 = f1
        self.x_seq = tuple(x_seq)
        self.y_seq = tuple(y_seq)
        self.n = n
        self.m = m
        self.seed = seed
        self.randomness = randomness
        self.index_set = index_set
        self.verify = verify
        self.field = self._check_field(field) if field is not None else self.field_for(f1, m)

    # ------------------------------------------------------------ 域与成本

    @classmethod
    def scale_for(cls, f1: FunctionTable) -> int:
        """最终结果的编码放大倍数"""
        return f1.common_denominator

    @classmethod
    def field_for(cls, f1: FunctionTable, m: int) -> PrimeField:
        return min_field_size(f1, m, min_modulus=cls.min_modulus, denominator=cls.scale_for(f1))

    def _check_field(self, field: PrimeField) -> PrimeField:
        required = self.field_for(self.f1, self.m)
        if field.modulus < required.modulus:
            raise FieldArithmeticException(
                "field",
                f"F_{field.modulus} is too small for {self.protocol_id}, need p >= {required.modulus}",
                details={"modulus": field.modulus, "required": required.modulus},
            )
        return field

    @classmethod
    def closed_form_extra_bits(cls, f1: FunctionTable, m: int, modulus: int, rerandomize: bool = False) -> int:
        raise NotImplementedError

    @classmethod
    def closed_form_total_bits(
        cls, f1: FunctionTable, n: int, m: int, modulus: int, rerandomize: bool = False
    ) -> int:
        return m * ceil_log2(n) + cls.closed_form_extra_bits(f1, m, modulus, rerandomize)

    # ------------------------------------------------------------ 执行

    def run(self) -> ProtocolResult:
        network = Network(
            BitMeter(self.n, len(self.f1.x_alphabet), len(self.f1.y_alphabet), self.field.modulus)
        )
        alice = PartyRuntime(ALICE, network, self.randomness.source_for(ALICE.value))
        bob = PartyRuntime(BOB, network, self.randomness.source_for(BOB.value))
        charlie = PartyRuntime(CHARLIE, network, self.randomness.source_for(CHARLIE.value))

        index_set = self.index_set or sample_indices(self.n, self.m, alice.stream("index"))
        bob_index_set = distribute_index_set(index_set, network)
        network.next_round()

        estimate = self._execute(index_set, bob_index_set, alice, bob, charlie)
        charlie.view.output = estimate

        if self.verify:
            expected = estimate_function(self.f1, self.x_seq, self.y_seq, index_set)
            if estimate != expected:
                logger.error(f"{self.protocol_id}: 估计值 {estimate} 与明文估计 {expected} 不一致")
                raise ProtocolException(
                    self.protocol_id,
                    "protocol estimate differs from the plaintext subsample estimate",
                    {"estimate": str(estimate), "expected": str(expected)},
                )

        return ProtocolResult(
            protocol_id=self.protocol_id,
            estimate=estimate,
            views=network.views,
            messages=network.messages,
            n=self.n,
            m=self.m,
            modulus=self.field.modulus,
            seed=self.seed,
            index_set=index_set,
            bits_by_channel=dict(network.meter.by_channel),
            rerandomize=getattr(self, "rerandomize", False),
        )

    def _execute(
        self,
        index_set: IndexSet,
        bob_index_set: IndexSet,
        alice: PartyRuntime,
        bob: PartyRuntime,
        charlie: PartyRuntime,
    ) -> Fraction:
        raise NotImplementedError

    def _finish(self, total: FieldElement) -> Fraction:
        """Charlie 把 m·F̂_n 的域编码解码并除以 m"""
        return decode_centered(total, self.scale_for(self.f1), self.m)


class OneTimePadProtocol(Protocol):
    """移位一次一密协议

    1. Alice/Bob 为每个采样位置抽取移位 α_i/β_i，把加密符号发给 Charlie
    2. Charlie 构造指示矩阵 M_i，加法拆分后分别发给 Alice 和 Bob
    3. Alice 与 Bob 交换移位，各自按移位取回 L_A / L_B
    4. Alice 抽取盐值 Z 发给 Bob
    5. Alice 发 F_A + Z，Bob 发 F_B − Z，Charlie 相加得到 m·F̂_n
    """

    protocol_id = "otp"
    min_modulus = 3

    @classmethod
    def closed_form_extra_bits(cls, f1: FunctionTable, m: int, modulus: int, rerandomize: bool = False) -> int:
        bx = ceil_log2(len(f1.x_alphabet))
        by = ceil_log2(len(f1.y_alphabet))
        bf = ceil_log2(modulus)
        cells = len(f1.x_alphabet) * len(f1.y_alphabet)
        return 2 * m * (bx + by + cells * bf) + 3 * bf

    def _exchange_salt(self, alice: PartyRuntime, bob: PartyRuntime) -> Tuple[FieldElement, FieldElement]:
        """Alice 抽取盐值并发给 Bob，返回双方各自持有的 Z"""
        salt = alice.draw(self.field.modulus, "salt")
        alice.send(BOB, "Z", Unit.FIELD, [salt])
        (received,) = bob.receive("Z")
        return self.field.element(salt), self.field.element(received)

    def _execute(self, index_set, bob_index_set, alice, bob, charlie) -> Fraction:
        field = self.field
        x_alphabet = self.f1.x_alphabet
        y_alphabet = self.f1.y_alphabet
        cells: List[Cell] = list(self.f1.cells())

        # 第 1 轮：加密符号
        alpha_stream = alice.stream("alpha")
        beta_stream = bob.stream("beta")
        alpha = [draw_pad(x_alphabet, alpha_stream) for _ in index_set]
        beta = [draw_pad(y_alphabet, beta_stream) for _ in bob_index_set]
        masked_x = [pad_shift(self.x_seq[i - 1], pad, ENCRYPT) for i, pad in zip(index_set, alpha)]
        masked_y = [pad_shift(self.y_seq[i - 1], pad, ENCRYPT) for i, pad in zip(bob_index_set, beta)]
        alice.send(CHARLIE, "x_masked", Unit.X_SYMBOL, (x_alphabet.index(s) for s in masked_x))
        bob.send(CHARLIE, "y_masked", Unit.Y_SYMBOL, (y_alphabet.index(s) for s in masked_y))
        network = alice.network
        network.next_round()

        # 第 2 轮：Charlie 拆分指示矩阵
        seen_x = [x_alphabet.symbol_at(v) for v in charlie.receive("x_masked")]
        seen_y = [y_alphabet.symbol_at(v) for v in charlie.receive("y_masked")]
        split_stream = charlie.stream("M_A")
        shares_a: List[int] = []
        shares_b: List[int] = []
        for x_bar, y_bar in zip(seen_x, seen_y):
            for cell in cells:
                indicator = field.element(int(cell == (x_bar, y_bar)))
                share_a, share_b = additive_split(indicator, split_stream)
                shares_a.append(share_a.value)
                shares_b.append(share_b.value)
        charlie.send(ALICE, "M_A", Unit.FIELD, shares_a)
        charlie.send(BOB, "M_B", Unit.FIELD, shares_b)
        network.next_round()

        # 第 3 轮：交换移位
        alice.send(BOB, "alpha", Unit.X_SYMBOL, (pad.shift for pad in alpha))
        bob.send(ALICE, "beta", Unit.Y_SYMBOL, (pad.shift for pad in beta))
        alpha_at_bob = [PadSymbol(v, x_alphabet) for v in bob.receive("alpha")]
        beta_at_alice = [PadSymbol(v, y_alphabet) for v in alice.receive("beta")]
        network.next_round()

        local_a = self._unmask(alice.receive("M_A"), alpha, beta_at_alice, cells)
        local_b = self._unmask(bob.receive("M_B"), alpha_at_bob, beta, cells)
        if self.verify:
            self._check_partial_frequency(index_set, local_a, local_b)

        encoded = to_field(self.f1, field)
        f_a = sum((encoded[cell] * local_a[cell] for cell in cells), field.zero)
        f_b = sum((encoded[cell] * local_b[cell] for cell in cells), field.zero)

        # 第 4 轮：盐值
        salt_alice, salt_bob = self._exchange_salt(alice, bob)
        network.next_round()

        # 第 5 轮：Charlie 汇总
        alice.send(CHARLIE, "F_A+Z", Unit.FIELD, [(f_a + salt_alice).value])
        bob.send(CHARLIE, "F_B-Z", Unit.FIELD, [(f_b - salt_bob).value])
        (from_alice,) = charlie.receive("F_A+Z")
        (from_bob,) = charlie.receive("F_B-Z")
        return self._finish(field.element(from_alice + from_bob))

    def _unmask(
        self,
        flat_shares: Sequence[int],
        alpha: Sequence[PadSymbol],
        beta: Sequence[PadSymbol],
        cells: List[Cell],
    ) -> Dict[Cell, FieldElement]:
        """L(x,y) = Σ_i M_i(⊕α_i(x), ⊕β_i(y))"""
        field = self.field
        width = len(cells)
        position = {cell: k for k, cell in enumerate(cells)}
        local = {cell: field.zero for cell in cells}
        for j, (pad_x, pad_y) in enumerate(zip(alpha, beta)):
            row = flat_shares[j * width:(j + 1) * width]
            for x, y in cells:
                shifted = (pad_shift(x, pad_x, ENCRYPT), pad_shift(y, pad_y, ENCRYPT))
                local[(x, y)] = local[(x, y)] + row[position[shifted]]
        return local

    def _check_partial_frequency(
        self,
        index_set: IndexSet,
        local_a: Dict[Cell, FieldElement],
        local_b: Dict[Cell, FieldElement],
    ) -> None:
        pairs = [(self.x_seq[i - 1], self.y_seq[i - 1]) for i in index_set]
        for cell in local_a:
            expected = self.field.element(pairs.count(cell))
            if local_a[cell] + local_b[cell] != expected:
                logger.error(f"otp: L_A + L_B 在 {cell} 处与 L 不一致")
                raise ProtocolException(
                    self.protocol_id,
                    f"L_A + L_B != L at {cell}",
                    {"cell": list(cell), "expected": expected.value},
                )


class _PolynomialProtocol(Protocol):
    """一次多项式分享骨架

    Alice 为左因子 a_j(x_i) 发牌（Bob 得坐标 2，Charlie 得坐标 3），
    Bob 为右因子 b_k(y_i) 发牌（Alice 得坐标 1，Charlie 得坐标 3）。
    各方在自己的横坐标 q 上计算
        F(q) = Σ_{i∈I} Σ_{j,k} c_jk·a_j(q)·b_k(q)
    这是常数项为 m·F̂_n 的二次多项式，Charlie 用三点插值取常数项。

    rerandomize 时 Alice 另抽盐值 Z 发给 Bob，两人发送 F(1)+Z 与 F(2)+Z，
    相当于叠加在 0 与 3 处为零的二次多项式，插值结果不变。
    """

    min_modulus = 5
    left_tags = ("a(2)", "a(3)")
    right_tags = ("b(1)", "b(3)")
    final_tags = ("F_A", "F_B")

    def __init__(self, *args, rerandomize: bool = False, **kwargs):
        self.rerandomize = rerandomize
        super().__init__(*args, **kwargs)

    @classmethod
    def product_form_for(cls, f1: FunctionTable) -> ProductForm:
        raise NotImplementedError

    @classmethod
    def scale_for(cls, f1: FunctionTable) -> int:
        left, right, coefficients = cls.product_form_for(f1).denominators
        return left * right * coefficients

    @classmethod
    def closed_form_extra_bits(cls, f1: FunctionTable, m: int, modulus: int, rerandomize: bool = False) -> int:
        form = cls.product_form_for(f1)
        finals = 3 if rerandomize else 2
        return (2 * m * (form.left_rank + form.right_rank) + finals) * ceil_log2(modulus)

    def _deal(
        self,
        dealer: PartyRuntime,
        factors: Sequence[Dict[str, Fraction]],
        symbols: Sequence[str],
        denominator: int,
        label: str,
    ) -> List[List[Tuple[FieldElement, FieldElement, FieldElement]]]:
        """对每个采样位置、每个因子发一次一次多项式份额"""
        stream = dealer.stream(label)
        dealt = []
        for symbol in symbols:
            row = []
            for factor in factors:
                secret = encode_rational(factor[symbol], denominator, self.field, strict=False)
                row.append(degree1_share(secret, stream).as_tuple())
            dealt.append(row)
        return dealt

    def _evaluate(
        self,
        left: Sequence[Sequence[FieldElement]],
        right: Sequence[Sequence[FieldElement]],
        coefficients: Sequence[Sequence[FieldElement]],
    ) -> FieldElement:
        total = self.field.zero
        for a_row, b_row in zip(left, right):
            for a_value, c_row in zip(a_row, coefficients):
                inner = sum((c * b for c, b in zip(c_row, b_row)), self.field.zero)
                total = total + a_value * inner
        return total

    def _execute(self, index_set, bob_index_set, alice, bob, charlie) -> Fraction:
        field = self.field
        form = self.product_form_for(self.f1)
        left_den, right_den, coeff_den = form.denominators
        coefficients = [
            [encode_rational(c, coeff_den, field, strict=False) for c in row] for row in form.coefficients
        ]
        rank_a, rank_b = form.left_rank, form.right_rank
        network = alice.network

        # 第 1 轮：发牌
        alice_symbols = [self.x_seq[i - 1] for i in index_set]
        bob_symbols = [self.y_seq[i - 1] for i in bob_index_set]
        dealt_a = self._deal(alice, form.left, alice_symbols, left_den, "slope_a")
        dealt_b = self._deal(bob, form.right, bob_symbols, right_den, "slope_b")

        to_bob, to_charlie_a = self.left_tags
        to_alice, to_charlie_b = self.right_tags
        alice.send(BOB, to_bob, Unit.FIELD, (share[1].value for row in dealt_a for share in row))
        alice.send(CHARLIE, to_charlie_a, Unit.FIELD, (share[2].value for row in dealt_a for share in row))
        bob.send(ALICE, to_alice, Unit.FIELD, (share[0].value for row in dealt_b for share in row))
        bob.send(CHARLIE, to_charlie_b, Unit.FIELD, (share[2].value for row in dealt_b for share in row))
        network.next_round()

        def _rows(values: Sequence[int], rank: int) -> List[List[FieldElement]]:
            return [[field.element(v) for v in values[k * rank:(k + 1) * rank]] for k in range(self.m)]

        a_at_1 = [[share[0] for share in row] for row in dealt_a]
        b_at_2 = [[share[1] for share in row] for row in dealt_b]
        value_alice = self._evaluate(a_at_1, _rows(alice.receive(to_alice), rank_b), coefficients)
        value_bob = self._evaluate(_rows(bob.receive(to_bob), rank_a), b_at_2, coefficients)
        value_charlie = self._evaluate(
            _rows(charlie.receive(to_charlie_a), rank_a),
            _rows(charlie.receive(to_charlie_b), rank_b),
            coefficients,
        )

        if self.rerandomize:
            salt = alice.draw(field.modulus, "salt")
            alice.send(BOB, "Z", Unit.FIELD, [salt])
            (salt_at_bob,) = bob.receive("Z")
            value_alice = value_alice + salt
            value_bob = value_bob + salt_at_bob
            network.next_round()

        # 最后一轮：Charlie 插值
        final_alice, final_bob = self.final_tags
        alice.send(CHARLIE, final_alice, Unit.FIELD, [value_alice.value])
        bob.send(CHARLIE, final_bob, Unit.FIELD, [value_bob.value])
        (at_1,) = charlie.receive(final_alice)
        (at_2,) = charlie.receive(final_bob)
        q1, q2, q3 = (field.element(q) for q in SHAMIR_ABSCISSAE)
        total = interpolate_at_zero(
            [(q1, field.element(at_1)), (q2, field.element(at_2)), (q3, value_charlie)]
        )
        return self._finish(total)


class PolyLProtocol(_PolynomialProtocol):
    """指示函数分享：g_ix 分享 1{x_i = x}，h_iy 分享 1{y_i = y}"""

    protocol_id = "poly-l"
    left_tags = ("g(2)", "g(3)")
    right_tags = ("h(1)", "h(3)")
    final_tags = ("F(1)", "F(2)")

    @classmethod
    def product_form_for(cls, f1: FunctionTable) -> ProductForm:
        return f1.indicator_product_form()


class PolyDirectProtocol(_PolynomialProtocol):
    """按 f1 的乘积形式直接分享因子，缺省回退到指示函数分解"""

    protocol_id = "poly-direct"

    @classmethod
    def product_form_for(cls, f1: FunctionTable) -> ProductForm:
        return f1.effective_product_form()


PROTOCOLS: Dict[str, Type[Protocol]] = {
    OneTimePadProtocol.protocol_id: OneTimePadProtocol,
    PolyLProtocol.protocol_id: PolyLProtocol,
    PolyDirectProtocol.protocol_id: PolyDirectProtocol,
}


def get_protocol(name: str, registry: Optional[Dict[str, Type[Protocol]]] = None) -> Type[Protocol]:
    registry = PROTOCOLS if registry is None else registry
    try:
        return registry[name]
    except KeyError:
        raise ValidationException("protocol", f"unknown protocol '{name}', choose from {sorted(registry)}")


def supports_rerandomize(protocol_cls: Type[Protocol]) -> bool:
    return issubclass(protocol_cls, _PolynomialProtocol)


def build_protocol(
    protocol_cls: Type[Protocol],
    f1: FunctionTable,
    x_seq: Sequence[str],
    y_seq: Sequence[str],
    m: int,
    rerandomize: bool = False,
    **kwargs,
) -> Protocol:
    """只向多项式协议传递 rerandomize"""
    if supports_rerandomize(protocol_cls):
        return protocol_cls(f1, x_seq, y_seq, m, rerandomize=rerandomize, **kwargs)
    if rerandomize:
        raise ValidationException("rerandomize", f"{protocol_cls.protocol_id} has no rerandomize option")
    return protocol_cls(f1, x_seq, y_seq, m, **kwargs)


def run_protocol_otp(f1: FunctionTable, x_seq, y_seq, m: int, seed: int, **kwargs) -> ProtocolResult:
    return OneTimePadProtocol(f1, x_seq, y_seq, m, seed=seed, **kwargs).run()


def run_protocol_poly_l(f1: FunctionTable, x_seq, y_seq, m: int, seed: int, **kwargs) -> ProtocolResult:
    return PolyLProtocol(f1, x_seq, y_seq, m, seed=seed, **kwargs).run()


def run_protocol_poly_direct(f1: FunctionTable, x_seq, y_seq, m: int, seed: int, **kwargs) -> ProtocolResult:
    return PolyDirectProtocol(f1, x_seq, y_seq, m, seed=seed, **kwargs).run()
