# Tasks package: one module per CLI command
