"""
Utilitaires transverses : journalisation et exceptions
"""
