#!/usr/bin/env python3
"""
Environment Configuration Checker
Shows HETEROPROOF_ environment variables and the configuration they produce.
"""
import os
from typing import Optional

from dotenv import load_dotenv

from dependencies.config import get_settings
from services.errors import ConfigError

PREFIX = "HETEROPROOF_"


def check_environment(config_path: Optional[str] = None) -> bool:
    """Check and display environment configuration"""
    print("🔍 Environment Configuration Check")
    print("=" * 50)

    load_dotenv()

    if os.path.exists(".env"):
        print("✅ .env file found")
    else:
        print("ℹ️  .env file not found (defaults and config file only)")

    print("\n📋 Environment Variables:")
    print("-" * 30)
    overrides = sorted(k for k in os.environ if k.upper().startswith(PREFIX))
    if overrides:
        for var in overrides:
            print(f"✅ {var}: {os.environ[var]}")
    else:
        print(f"ℹ️  No {PREFIX}* variables set")

    print("\n⚙️  Effective Configuration:")
    print("-" * 30)
    try:
        config = get_settings(config_path)
    except ConfigError as e:
        print(f"❌ {e}")
        return False

    for section, values in config.snapshot().items():
        for key, value in values.items():
            shown = "auto" if value is None else value
            print(f"   {section}.{key} = {shown}")

    if config.is_resolved:
        print("\n✅ All tunable values are resolved")
    else:
        print("\n⚠️  Some values are \"auto\"; run `prooftool.py tune` to resolve them")

    print("\n" + "=" * 50)
    print("✅ Environment check complete!")
    return True


if __name__ == "__main__":
    check_environment()
