"""fusionlab - core modules"""
