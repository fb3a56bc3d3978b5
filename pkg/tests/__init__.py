"""Tests for the bregman-stationarity package"""
