"""Packet-level MANET simulator with Watchdog and Selective Watchdog intrusion detection."""

__version__ = "0.1.0"
