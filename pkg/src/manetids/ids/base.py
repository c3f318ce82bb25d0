"""Hook interface the network calls into; schemes override what they need."""

from __future__ import annotations


class IDS:
    scheme = "none"

    def __init__(self, host=None):
        self.host = host
        self.alarms = []

    def attach(self, host) -> None:
        self.host = host

    # data-plane hooks
    def on_transmit(self, sender, packet, next_hop):
        pass

    def on_overhear(self, node, sender, packet):
        pass

    def on_source_send(self, packet):
        pass

    def on_dest_data(self, dest, packet):
        """Return an ACK packet to send back, or None."""
        return None

    def on_ack(self, source, packet):
        pass

    def on_route_selected(self, entry, discovery):
        pass

    def on_timer(self, tag):
        pass


class NullIDS(IDS):
    pass
