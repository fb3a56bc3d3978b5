"""Numerical and logging helpers"""
