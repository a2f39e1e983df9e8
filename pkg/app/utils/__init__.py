# Utilities shared by the sconv services and CLI
