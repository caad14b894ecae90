"""
Package services - Orchestration des sous-commandes
"""
