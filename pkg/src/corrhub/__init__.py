"""Sequential correlation-change detection and hub isolation."""
