"""Ambient services: logging, error handling, configuration and worker pool."""
