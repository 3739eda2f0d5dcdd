"""
処理モジュール（初期木・分割・再接続・ソルバー）
"""
