"""
Package views - Sérialisation des rapports d'expériences (CSV / JSON)
"""
