"""Link-level simulator for two-layer 802.11 frame aggregation (A-MSDU inside A-MPDU)."""

__version__ = "0.1.0"
