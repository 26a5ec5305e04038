"""Minimal plugin backend used by the CLI plugin-loading test."""

from helpers import FakeBackend


def factory(specs, config):
    return FakeBackend(specs, config)
