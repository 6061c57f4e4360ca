# CLI commands
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BREACH = 2
