"""
インスタンス生成モジュール
"""
