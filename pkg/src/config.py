# ==============================================
# Configuration Management
# ==============================================
#
# PURPOSE:
#   Load and validate runtime configuration from environment
#   variables / .env file. Hyperparameters (model, preprocessing,
#   training) are NOT here: they travel as dataclasses with the
#   code that uses them.
#
# CLASSES:
# --------
# - ServiceConfig (dataclass)
#     bind: str            (default "127.0.0.1:8000")   env DERM_BIND
#     max_body_bytes: int  (default 10485760)           env DERM_MAX_BODY_BYTES
#
# - LoggingConfig (dataclass)
#     level: str           (default "INFO")             env DERM_LOG_LEVEL
#
# - AppConfig (dataclass)
#     service: ServiceConfig
#     logging: LoggingConfig
#
# FUNCTION:
# ---------
# - get_config(reload=False) -> AppConfig
#     Load .env using python-dotenv, construct AppConfig.
#     Returns the same singleton on repeated calls.
#
# USAGE:
# ------
#   from src.config import get_config
#   config = get_config()
#   print(config.service.max_body_bytes)
#
# ==============================================

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


@dataclass
class ServiceConfig:
    """HTTP inference service configuration."""
    bind: str = "127.0.0.1:8000"
    max_body_bytes: int = 10 * 1024 * 1024

    def host_port(self) -> tuple[str, int]:
        return parse_bind(self.bind)


@dataclass
class LoggingConfig:
    level: str = "INFO"


@dataclass
class AppConfig:
    """Main application configuration."""
    service: ServiceConfig = field(default_factory=ServiceConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)


# Singleton instance
_config_instance: Optional[AppConfig] = None


def parse_bind(bind: str) -> tuple[str, int]:
    """'host:port' → (host, port)."""
    host, sep, port = bind.rpartition(":")
    if not sep or not host or not port.isdigit() or not 0 < int(port) < 65536:
        raise ValueError(f"bind address must look like host:port, got '{bind}'")
    return host, int(port)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got '{raw}'") from None
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def get_config(reload: bool = False) -> AppConfig:
    """
    Load configuration from environment variables / .env file.
    Returns the same singleton instance on repeated calls.

    Returns:
        AppConfig: Application configuration
    """
    global _config_instance

    if _config_instance is not None and not reload:
        return _config_instance

    # Load .env file from project root
    env_path = Path(__file__).parent.parent / ".env"
    load_dotenv(dotenv_path=env_path)

    service_config = ServiceConfig(
        bind=os.getenv("DERM_BIND", "127.0.0.1:8000"),
        max_body_bytes=_env_int("DERM_MAX_BODY_BYTES", 10 * 1024 * 1024),
    )
    logging_config = LoggingConfig(level=os.getenv("DERM_LOG_LEVEL", "INFO").upper())

    _config_instance = AppConfig(
        service=service_config,
        logging=logging_config,
    )

    return _config_instance


def configure_logging(level: Optional[str] = None) -> None:
    """One-time root logger setup for entry points."""
    logging.basicConfig(level=level or get_config().logging.level, format=LOG_FORMAT)
