"""运行配置 Schema"""
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator


class RunConfig(BaseModel):
    """命令行与配置文件合并后的完整运行配置"""

    command: Literal["run", "audit", "distortion", "comm-cost"] = Field(..., description="子命令")
    protocol: str = Field("otp", description="协议ID：otp / poly-l / poly-direct；comm-cost 可用 all")
    f1: str = Field("hamming", description="内置函数表名称或函数表文件路径")
    alphabet_size: int = Field(2, ge=1, description="内置函数表的 |X|")
    y_alphabet_size: Optional[int] = Field(None, ge=1, description="内置函数表的 |Y|，缺省同 |X|")

    # 序列
    x: Optional[str] = Field(None, description="x^n 序列文件")
    y: Optional[str] = Field(None, description="y^n 序列文件")
    generator: Optional[str] = Field(None, description="内置序列生成器")
    period: int = Field(2, ge=1, description="periodic 生成器的周期")

    # 规模
    n: Optional[int] = Field(None, ge=1, description="序列长度（run / audit）")
    n_list: List[int] = Field(default_factory=list, description="n 网格（distortion / comm-cost）")
    m: Optional[Union[int, Literal["equal-n"]]] = Field(None, description="采样数，或 equal-n")
    m_list: List[int] = Field(default_factory=list, description="m 网格（distortion）")
    m_rule: Literal["fixed", "sqrt", "equal-n", "custom"] = Field("fixed", description="comm-cost 的 m 规则")
    seed: Optional[int] = Field(None, description="随机种子（run 必填）")

    # 实验
    mode: Literal["exhaustive", "monte_carlo"] = Field("exhaustive", description="失真搜索模式")
    trials: Optional[int] = Field(None, gt=0, description="Monte Carlo 试验次数")
    rerandomize: bool = Field(False, description="多项式协议的再随机化")
    modulus: Optional[int] = Field(None, ge=3, description="指定素数域")
    fixed_index: Optional[List[int]] = Field(None, description="审计时固定的下标集（较弱模式）")
    live: bool = Field(False, description="comm-cost 实际运行协议并核对计量")

    # 预算
    enumeration_budget: Optional[int] = Field(None, gt=0)
    audit_budget: Optional[int] = Field(None, gt=0)
    pair_budget: Optional[int] = Field(None, gt=0)
    workers: Optional[int] = Field(None, ge=1)

    # 输出
    format: Optional[Literal["text", "json", "csv"]] = Field(None, description="输出格式，缺省时 run/audit 为 text，表格命令为 csv")
    output: Optional[str] = Field(None, description="输出文件，缺省写到标准输出")
    transcript: Optional[str] = Field(None, description="run 的消息转储文件")

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        if self.command == "run" and self.seed is None:
            raise ValueError("seed is mandatory for run")
        if isinstance(self.m, int):
            if self.m < 1:
                raise ValueError(f"m must be >= 1, got {self.m}")
            if self.n is not None and self.m > self.n:
                raise ValueError(f"m={self.m} exceeds n={self.n}")
        if any(value < 1 for value in self.m_list + self.n_list):
            raise ValueError("grid values must be >= 1")
        if self.m_rule == "custom" and len(self.m_list) != len(self.n_list):
            raise ValueError("m-rule custom needs one m per n")
        return self
