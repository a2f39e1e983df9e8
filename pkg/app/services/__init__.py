"""Service layer: one module per aggregate, module-level functions"""
