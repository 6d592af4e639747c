"""
Base Module for CMS-Wheat.
Provides the initialize/start/stop lifecycle used by system components.
"""
import logging


class BaseModule:
    """
    Base class for lifecycle-managed components.

    Subclasses override ``_initialize``, ``_start`` and ``_stop``; the public
    methods wrap them so a failing component logs its error and reports
    ``False`` instead of raising.
    """

    def __init__(self, name: str):
        self.name = name
        self.initialized = False
        self.running = False
        self.logger = logging.getLogger(f"cms_wheat.{name}")

    def initialize(self) -> bool:
        """
        Initialize the component.

        Returns:
            bool: True if initialization was successful
        """
        if self.initialized:
            return True
        try:
            self.initialized = bool(self._initialize())
        except Exception as e:
            self.logger.exception(f"Error initializing {self.name}: {str(e)}")
            self.initialized = False
        return self.initialized

    def start(self) -> bool:
        """
        Start the component, initializing it first if needed.

        Returns:
            bool: True if startup was successful
        """
        if self.running:
            return True
        if not self.initialized and not self.initialize():
            return False
        try:
            self.running = bool(self._start())
        except Exception as e:
            self.logger.exception(f"Error starting {self.name}: {str(e)}")
            self.running = False
        return self.running

    def stop(self) -> bool:
        """
        Stop the component.

        Returns:
            bool: True if shutdown was successful
        """
        if not self.running:
            return True
        try:
            stopped = bool(self._stop())
        except Exception as e:
            self.logger.exception(f"Error stopping {self.name}: {str(e)}")
            return False
        self.running = not stopped
        return stopped

    def _initialize(self) -> bool:
        return True

    def _start(self) -> bool:
        return True

    def _stop(self) -> bool:
        return True
