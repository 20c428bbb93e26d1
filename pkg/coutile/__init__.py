"""Co-utile circuit-free multiparty computation engine and simulator."""
