"""Virtual-password login, blind-signature e-cash, and limit-bounded
payment credentials, with adversary simulators and an HTTP demo bank."""

from . import ecash, limitpay, numcrypt, sessions, simulate, vpass, wire

__all__ = ["ecash", "limitpay", "numcrypt", "sessions", "simulate", "vpass", "wire"]

__version__ = "0.1.0"
