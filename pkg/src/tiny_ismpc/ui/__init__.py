"""
UI - rich 기반 리포트 출력
"""
