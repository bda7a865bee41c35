"""Core solver layer: Liouvillian reduction, Floquet resummation, expansions, run orchestration"""
