"""Dense linear algebra, ODE and Fourier services"""
