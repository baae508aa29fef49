"""配置管理"""
from pathlib import Path

import yaml
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """应用配置 - 日志、枚举预算与实验默认值"""

    # 应用配置
    APP_NAME: str = "Sampled Sum-Type SMC"
    APP_VERSION: str = "1.0.0"

    # 日志配置
    LOG_LEVEL: str = "INFO"

    # 枚举预算
    ENUMERATION_BUDGET: int = 10 ** 6        # 子集枚举
    AUDIT_BUDGET: int = 10 ** 8              # 隐私审计的基本步数
    EXHAUSTIVE_PAIR_BUDGET: int = 10 ** 6    # 穷举序列对

    # 实验默认值
    MONTE_CARLO_TRIALS: int = 10 ** 4
    WORKERS: int = 1

    # 调试：估计式两种展开的交叉校验
    CHECK_EXPANSIONS: bool = True

    class Config:
        env_file = ".env"
        case_sensitive = True


def load_config_from_yaml(config_file: str = "config/config.yaml") -> Settings:
    """从 YAML 文件加载配置"""
    config_path = Path(config_file)
    if not config_path.exists():
        return Settings()

    with open(config_path, 'r', encoding='utf-8') as f:
        config_data = yaml.safe_load(f) or {}

    settings_dict = {}

    if 'logging' in config_data:
        logging = config_data['logging']
        settings_dict['LOG_LEVEL'] = logging.get('level', 'INFO').upper()

    if 'budgets' in config_data:
        budgets = config_data['budgets']
        settings_dict['ENUMERATION_BUDGET'] = budgets.get('enumeration', 10 ** 6)
        settings_dict['AUDIT_BUDGET'] = budgets.get('audit', 10 ** 8)
        settings_dict['EXHAUSTIVE_PAIR_BUDGET'] = budgets.get('exhaustive_pairs', 10 ** 6)

    if 'experiments' in config_data:
        experiments = config_data['experiments']
        settings_dict['MONTE_CARLO_TRIALS'] = experiments.get('monte_carlo_trials', 10 ** 4)
        settings_dict['WORKERS'] = experiments.get('workers', 1)
        settings_dict['CHECK_EXPANSIONS'] = experiments.get('check_expansions', True)

    return Settings(**settings_dict)


# 全局配置实例
settings = load_config_from_yaml()
