"""Input-output observables on quasi-stationary states"""
