"""Result writers: CSV tables and run manifests"""
