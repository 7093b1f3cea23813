"""
Console status output: emoji lines and banners, coloured with colorama.

Everything goes to stderr; stdout is reserved for verdicts and reports.
"""
import sys

from colorama import Fore, Style
from colorama import just_fix_windows_console

_quiet = False


def setup(quiet=False):
    global _quiet
    _quiet = quiet
    just_fix_windows_console()


def _emit(text, color=""):
    if _quiet:
        return
    reset = Style.RESET_ALL if color else ""
    print(f"{color}{text}{reset}", file=sys.stderr)


def banner(title, width=60):
    _emit("")
    _emit(title, Style.BRIGHT)
    _emit("=" * width)


def info(text):
    _emit(text)


def ok(text):
    _emit(f"✅ {text}", Fore.GREEN)


def warn(text):
    _emit(f"⚠️ {text}", Fore.YELLOW)


def fail(text):
    # failures are shown even in quiet mode
    print(f"{Fore.RED}❌ {text}{Style.RESET_ALL}", file=sys.stderr)


def kv(label, value, emoji="📊"):
    _emit(f"{emoji} {label}: {value}")
