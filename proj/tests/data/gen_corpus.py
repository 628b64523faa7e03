#!/usr/bin/env python3
# Copyright 2026 The Nusa Toolkit Authors.
# SPDX-License-Identifier: Apache-2.0
"""Writes the small multilingual fixture corpus used by the pipeline tests."""

import json
import random
import sys

BANK = {
    "indonesian": [
        "Pasar tradisional di kota itu selalu ramai pada pagi hari.",
        "Para petani menanam padi ketika musim hujan tiba.",
        "Anak-anak belajar membaca di perpustakaan sekolah setiap sore.",
        "Pemerintah daerah membangun jembatan baru di atas sungai besar.",
        "Ibu memasak rendang untuk merayakan hari raya bersama keluarga.",
        "Kereta api berangkat dari stasiun tepat pukul tujuh malam.",
        "Nelayan pulang membawa ikan segar dari laut lepas.",
        "Guru menjelaskan sejarah kemerdekaan Indonesia dengan sabar.",
        "Hutan hujan tropis menyimpan keanekaragaman hayati yang luar biasa.",
        "Warga desa bergotong royong membersihkan saluran air.",
        "Harga beras naik karena panen tertunda oleh banjir.",
        "Mahasiswa itu menulis skripsi tentang bahasa daerah.",
        "Dr. Sari memeriksa pasien di puskesmas kecamatan.",
        "Perayaan budaya itu menampilkan tari, musik, dan kuliner khas.",
    ],
    "javanese": [
        "Bapak tindak menyang sawah esuk-esuk banget.",
        "Simbah remen crita babagan jaman biyen marang putune.",
        "Bocah-bocah padha dolanan layangan ing pategalan.",
        "Ibu tuku sayuran ing pasar cedhak omah.",
        "Wong desa padha gotong royong ndandani dalan.",
        "Udan deres nggawe kali dadi banjir.",
        "Aku sinau basa Jawa saben dina Senen.",
        "Gamelan ditabuh nalika ana pahargyan manten.",
        "Pak guru paring pitutur supaya sregep sinau.",
        "Sega pecel iku panganan kang misuwur ing kutha Madiun.",
    ],
    "sundanese": [
        "Abdi nuju diajar basa Sunda di sakola.",
        "Indung kuring masak sangu jeung lauk asin.",
        "Barudak ulin bal di buruan imah.",
        "Patani melak pare di sawah nu lega.",
        "Urang lembur sok gotong royong ngabersihan jalan.",
        "Hujan gede pisan tadi peuting di Bandung.",
        "Bapa angkat ka pasar isuk-isuk pisan.",
        "Angklung dimaénkeun dina acara kabudayaan.",
        "Guru masihan pancén ka murid-murid.",
        "Gunung Tangkuban Parahu kasohor ku legendana.",
    ],
    "balinese": [
        "Tiang jagi ka peken sareng memen.",
        "Krama desa ngaturang banten ring pura.",
        "Anak alit sami malajah nyurat aksara Bali.",
        "Petani ngarap carik sadurung galah.",
        "Gamelan kaayahang ritatkala wenten upacara.",
        "Ujan bales pisan ring Denpasar ibi sanja.",
        "Guru nyobyahang indik sejarah Bali.",
        "Pengayah sami ngaryanin penjor ring margi.",
    ],
    "minangkabau": [
        "Ambo pai ka pasa jo amak pagi ko.",
        "Urang kampuang basamo-samo mambangun musajik.",
        "Anak-anak baraja mangaji di surau.",
        "Randang adolah masakan khas dari ranah Minang.",
        "Hujan labek bana tadi malam di Padang.",
        "Mamak manasiahati kamanakan supayo rajin baraja.",
        "Rumah gadang punyo atok nan bagonjong.",
        "Padi di sawah alah mulai kuniang.",
    ],
    "english": [
        "The morning market in the old town is always busy.",
        "Farmers plant rice when the rainy season begins.",
        "Children read books in the school library every afternoon.",
        "The new bridge was opened to traffic last month.",
        "Fishermen return with fresh fish from the open sea.",
        "The teacher explained the history of the region patiently.",
        "Tropical rainforests hold an extraordinary variety of life.",
        "Villagers worked together to clean the irrigation channels.",
    ],
}

PLAN = [("indonesian", 10), ("javanese", 5), ("sundanese", 5), ("balinese", 4), ("minangkabau", 4), ("english", 4)]


def make_doc(rng, lang, k):
    sentences = rng.sample(BANK[lang], k)
    return " ".join(sentences)


def main(path):
    rng = random.Random(20260101)
    docs = []
    for lang, count in PLAN:
        for i in range(count):
            k = min(len(BANK[lang]), rng.randint(6, 8))
            docs.append({"id": f"{lang[:3]}-{i:02d}", "text": make_doc(rng, lang, k), "lang": lang, "source": "fixture"})
    # An exact duplicate (case and spacing differ) and a near duplicate.
    docs.append({"id": "ind-dup-exact", "text": "  " + docs[0]["text"].upper().replace(" ", "   "), "lang": "indonesian", "source": "fixture"})
    near = docs[1]["text"].split(" ")
    near[-1] = "selesai."
    docs.append({"id": "ind-dup-near", "text": " ".join(near), "lang": "indonesian", "source": "fixture"})
    # Fails the repetition filter.
    docs.append({"id": "ind-spam", "text": "\n".join(["Beli sekarang juga, diskon besar hari ini!"] * 12), "lang": "indonesian", "source": "fixture"})
    # Fails the length filter.
    docs.append({"id": "ind-short", "text": "Terlalu pendek.", "lang": "indonesian", "source": "fixture"})
    with open(path, "w", encoding="utf-8") as f:
        for d in docs:
            f.write(json.dumps(d, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "corpus.jsonl")
