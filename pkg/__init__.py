# Separation Bell toolkit
# Bell inequalities from separation and quasi-distance triangle inequalities,
# their monogamy relations and local, no-signaling and GHZ bounds

__version__ = "1.0.0"
__author__ = "Separation Bell Team"
__description__ = "Separation Bell inequalities, monogamy relations and their bounds"
