"""Utility functions layer"""
