"""统一异常处理模块

提供项目级别的自定义异常类和错误码定义，用于规范化错误处理。
命令行入口根据 exit_code 决定进程退出码：
0 成功/通过，1 验证失败，2 资源或配置错误。
"""
from typing import Any, Dict, Optional

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_RESOURCE_ERROR = 2


class SMCException(Exception):
    """安全计算库基础异常类

    所有自定义异常都应继承此类，提供统一的错误处理接口。

    Attributes:
        message: 错误消息
        code: 错误代码
        exit_code: 命令行退出码
        details: 额外的错误详情
    """

    def __init__(
        self,
        message: str,
        code: str = "UNKNOWN_ERROR",
        exit_code: int = EXIT_RESOURCE_ERROR,
        details: Optional[Dict[str, Any]] = None
    ):
        self.message = message
        self.code = code
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """转换为字典格式，用于 JSON 输出"""
        return {
            "error": {
                "code": self.code,
                "message": self.message,
                "details": self.details
            }
        }


class ValidationException(SMCException):
    """参数验证异常"""

    def __init__(self, field: str, message: str):
        super().__init__(
            message=f"Validation failed for '{field}': {message}",
            code="VALIDATION_ERROR",
            details={
                "field": field,
                "validation_message": message
            }
        )


class FieldMismatchException(SMCException):
    """不同素域之间的运算"""

    def __init__(self, left_modulus: int, right_modulus: int):
        super().__init__(
            message=f"Operands belong to different fields: F_{left_modulus} vs F_{right_modulus}",
            code="FIELD_MISMATCH",
            details={
                "left_modulus": left_modulus,
                "right_modulus": right_modulus
            }
        )


class FieldArithmeticException(SMCException):
    """域运算异常（除零、超出有符号余量、域过小）"""

    def __init__(self, operation: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Field {operation} failed: {message}",
            code="FIELD_ARITHMETIC_ERROR",
            details={"operation": operation, **(details or {})}
        )


class BudgetExceededException(SMCException):
    """枚举规模超出预算"""

    def __init__(self, operation: str, required: int, budget: int):
        super().__init__(
            message=(
                f"{operation} requires {required} enumeration steps, budget is {budget}; "
                f"use smaller parameters or raise the budget"
            ),
            code="BUDGET_EXCEEDED",
            details={
                "operation": operation,
                "required": required,
                "budget": budget
            }
        )


class ProtocolException(SMCException):
    """协议执行异常"""

    def __init__(self, protocol: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Protocol '{protocol}' error: {message}",
            code="PROTOCOL_ERROR",
            details={"protocol": protocol, **(details or {})}
        )


class ConsistencyException(SMCException):
    """内部一致性校验失败（估计式展开不一致、界被违反等）"""

    def __init__(self, check: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(
            message=f"Consistency check '{check}' failed: {message}",
            code="CONSISTENCY_ERROR",
            exit_code=EXIT_VERIFICATION_FAILED,
            details={"check": check, **(details or {})}
        )


class ParseException(SMCException):
    """文件解析异常"""

    def __init__(self, source: str, line: int, message: str):
        super().__init__(
            message=f"{source}:{line}: {message}",
            code="PARSE_ERROR",
            details={
                "source": source,
                "line": line
            }
        )


class ConfigurationException(SMCException):
    """配置错误异常"""

    def __init__(self, config_key: str, message: str):
        super().__init__(
            message=f"Configuration error for '{config_key}': {message}",
            code="CONFIGURATION_ERROR",
            details={
                "config_key": config_key
            }
        )
