"""Model builders and modulation waveforms"""
