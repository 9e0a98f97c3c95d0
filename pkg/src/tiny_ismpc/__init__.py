"""
Tiny ISMPC
==========
불확실 PWA 모델 기반 적분 슬라이딩 모드 제어기 설계 도구.

    palm       비선형 플랜트 → 불확실 PWA 모델
    lmi        LMI 실현 가능성 (배리어 내점법)
    synthesis  공칭 이득, 슬라이딩 면, γ 선택
    sim        RK4 폐루프 시뮬레이션
    bench      Chua 회로, 역진자 사례
"""

__version__ = "0.1.0"
