"""
ベンチマークモジュール
"""
