"""
入出力関連モジュール
"""
