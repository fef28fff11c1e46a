# Initialisation du paquet
